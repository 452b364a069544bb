use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decopt::grid::maze::{self, Facing, MazeState, MAZE_OBS_LEN, VIEW_SIZE};
use decopt::grid::{build_task_sets, Cell, DomainKind, GridSpec, Layout, Phase};

/// World coordinates of window position (`ahead`, `lateral`), derived from the
/// forward and right-hand unit vectors of each heading.
fn window(agent: Cell, facing: Facing, ahead: isize, lateral: isize) -> (isize, isize) {
    let (fwd, right) = match facing {
        Facing::North => ((-1, 0), (0, 1)),
        Facing::East => ((0, 1), (1, 0)),
        Facing::South => ((1, 0), (0, -1)),
        Facing::West => ((0, -1), (-1, 0)),
    };
    let l = lateral - (VIEW_SIZE as isize) / 2;
    (
        agent.0 as isize + ahead * fwd.0 + l * right.0,
        agent.1 as isize + ahead * fwd.1 + l * right.1,
    )
}

fn is_open(spec: &GridSpec, (r, c): (isize, isize)) -> bool {
    r >= 0
        && c >= 0
        && (r as usize) < spec.height
        && (c as usize) < spec.width
        && !spec.walls.contains(&Cell(r as usize, c as usize))
}

fn is_wall(spec: &GridSpec, (r, c): (isize, isize)) -> bool {
    r >= 0 && c >= 0 && spec.walls.contains(&Cell(r as usize, c as usize))
}

/// Depth-first fill of open window cells connected to the agent, then the
/// walls touching the filled region.
fn oracle(spec: &GridSpec, agent: Cell, facing: Facing) -> Vec<Vec<bool>> {
    let n = VIEW_SIZE as isize;
    let mut filled = vec![vec![false; VIEW_SIZE]; VIEW_SIZE];
    fn fill(spec: &GridSpec, agent: Cell, facing: Facing, a: isize, l: isize, filled: &mut Vec<Vec<bool>>) {
        let n = VIEW_SIZE as isize;
        if a < 0 || l < 0 || a >= n || l >= n || filled[a as usize][l as usize] {
            return;
        }
        if (a, l) != (0, n / 2) && !is_open(spec, window(agent, facing, a, l)) {
            return;
        }
        filled[a as usize][l as usize] = true;
        for (da, dl) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            fill(spec, agent, facing, a + da, l + dl, filled);
        }
    }
    fill(spec, agent, facing, 0, n / 2, &mut filled);
    let mut visible = filled.clone();
    for a in 0..n {
        for l in 0..n {
            let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(da, dl)| {
                let (na, nl) = (a + da, l + dl);
                na >= 0 && nl >= 0 && na < n && nl < n && filled[na as usize][nl as usize]
            });
            if touches && is_wall(spec, window(agent, facing, a, l)) {
                visible[a as usize][l as usize] = true;
            }
        }
    }
    visible
}

fn random_spec(rng: &mut ChaCha8Rng) -> GridSpec {
    let n = rng.gen_range(5..=11);
    let walls = (0..n * n)
        .map(|i| Cell(i / n, i % n))
        .filter(|_| rng.gen_bool(0.3))
        .collect::<Vec<_>>();
    let free: Vec<Cell> = (0..n * n).map(|i| Cell(i / n, i % n)).filter(|c| !walls.contains(c)).collect();
    GridSpec {
        kind: DomainKind::Maze,
        phase: Phase::Source,
        width: n,
        height: n,
        starts: vec![free[0]],
        start_facing: None,
        goals: vec![*free.last().unwrap()],
        walls,
        max_steps: 100,
    }
}

#[test]
fn visibility_matches_flood_fill_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    while checked < 300 {
        let spec = random_spec(&mut rng);
        if spec.starts[0] == spec.goals[0] {
            continue;
        }
        let Ok(layout) = Layout::new(spec.clone()) else {
            continue;
        };
        for _ in 0..8 {
            let agent = Cell(rng.gen_range(0..spec.height), rng.gen_range(0..spec.width));
            if spec.walls.contains(&agent) {
                continue;
            }
            let facing = [Facing::North, Facing::East, Facing::South, Facing::West][rng.gen_range(0..4)];
            let state = MazeState {
                agent,
                facing,
                steps_taken: 0,
                done: false,
            };
            let got = maze::visibility(&state, &layout);
            let want = oracle(&spec, agent, facing);
            for a in 0..VIEW_SIZE {
                assert_eq!(got[a].to_vec(), want[a], "agent {agent:?} facing {facing:?}, row {a}");
            }
            let obs = maze::encode(&state, &layout);
            assert_eq!(obs.0.len(), MAZE_OBS_LEN);
            let visible_cells = want.iter().flatten().filter(|v| **v).count();
            assert_eq!(obs.0[..MAZE_OBS_LEN - 4].iter().sum::<f64>() as usize, visible_cells);
            checked += 1;
        }
    }
}

#[test]
fn maze_tasks_have_expected_shapes() {
    assert_eq!(MAZE_OBS_LEN, 79);
    for size in [9, 19] {
        let tasks = build_task_sets(DomainKind::Maze, size, 0).unwrap();
        for spec in &tasks.source {
            assert_eq!(spec.max_steps, 1000);
        }
        for spec in &tasks.target {
            assert_eq!(spec.max_steps, 361);
        }
    }
}

#[test]
fn turning_never_moves_and_forward_respects_walls() {
    let tasks = build_task_sets(DomainKind::Maze, 9, 0).unwrap();
    let layout = Layout::new(tasks.source[0].clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = MazeState {
        agent: tasks.source[0].starts[0],
        facing: Facing::East,
        steps_taken: 0,
        done: false,
    };
    for _ in 0..200 {
        let a = rng.gen_range(0..3);
        let (next, res) = maze::step(&state, &layout, a).unwrap();
        if a < 2 {
            assert_eq!(next.agent, state.agent);
            assert_ne!(next.facing, state.facing);
        } else {
            let (dr, dc) = state.facing.delta();
            let ahead = state.agent.offset(dr, dc).filter(|c| layout.is_open(*c));
            assert_eq!(next.agent, ahead.unwrap_or(state.agent));
        }
        if res.terminal {
            break;
        }
        state = next;
    }
}
