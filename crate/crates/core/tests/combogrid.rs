use std::collections::{HashMap, VecDeque};

use decopt::env::Environment;
use decopt::grid::{build_task_sets, combo, Cell, ComboGrid, ComboState, DomainKind, GridSpec, Layout};

const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn open(spec: &GridSpec, r: isize, c: isize) -> bool {
    r >= 0
        && c >= 0
        && (r as usize) < spec.height
        && (c as usize) < spec.width
        && !spec.walls.contains(&Cell(r as usize, c as usize))
}

/// Cell-level breadth-first distances from `from`, with walls as obstacles.
fn cell_distances(spec: &GridSpec, from: Cell) -> HashMap<Cell, usize> {
    let mut dist = HashMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    while let Some(cell) = queue.pop_front() {
        for (dr, dc) in DIRS {
            let (r, c) = (cell.0 as isize + dr, cell.1 as isize + dc);
            if open(spec, r, c) {
                let next = Cell(r as usize, c as usize);
                if !dist.contains_key(&next) {
                    dist.insert(next, dist[&cell] + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    dist
}

/// Fewest primitive actions from the start to the goal, searched over the
/// environment's own (cell, buffer) states.
fn primitive_distance(spec: &GridSpec) -> Option<usize> {
    let layout = Layout::new(spec.clone()).unwrap();
    let start = ComboState::initial(&layout, spec.starts[0]);
    let key = |s: &ComboState| (s.agent, s.buffer.clone());
    let mut seen = HashMap::from([(key(&start), 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        let d = seen[&key(&state)];
        for a in 0..3 {
            let (next, res) = combo::step(&state, &layout, a).unwrap();
            if res.terminal {
                return Some(d + 1);
            }
            if res.truncated || seen.contains_key(&key(&next)) {
                continue;
            }
            seen.insert(key(&next), d + 1);
            queue.push_back(next);
        }
    }
    None
}

/// Every shortest cell path uses all four directions: removing any one
/// direction makes the goal unreachable in the optimal number of moves.
fn needs_all_directions(spec: &GridSpec) -> bool {
    let best = cell_distances(spec, spec.starts[0])[&spec.goals[0]];
    (0..4).all(|skip| {
        let mut dist = HashMap::from([(spec.starts[0], 0usize)]);
        let mut queue = VecDeque::from([spec.starts[0]]);
        while let Some(cell) = queue.pop_front() {
            for (i, (dr, dc)) in DIRS.iter().enumerate() {
                let (r, c) = (cell.0 as isize + dr, cell.1 as isize + dc);
                if i != skip && open(spec, r, c) {
                    let next = Cell(r as usize, c as usize);
                    if !dist.contains_key(&next) {
                        dist.insert(next, dist[&cell] + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        dist.get(&spec.goals[0]).is_none_or(|&d| d > best)
    })
}

#[test]
fn optimal_source_paths_are_four_actions_per_cell() {
    for w in 3..=6 {
        let tasks = build_task_sets(DomainKind::Combogrid, w, 0).unwrap();
        for (t, spec) in tasks.source.iter().enumerate() {
            let cells = cell_distances(spec, spec.starts[0])[&spec.goals[0]];
            let prims = primitive_distance(spec).expect("goal reachable");
            assert_eq!(prims, 4 * cells, "size {w} task {t}");
            assert!(needs_all_directions(spec), "size {w} task {t}");
        }
    }
}

#[test]
fn observation_length_and_walls_are_unobserved() {
    for w in 3..=6 {
        let tasks = build_task_sets(DomainKind::Combogrid, w, 0).unwrap();
        for spec in tasks.source.iter().chain(&tasks.target) {
            let mut env = ComboGrid::new(Layout::new(spec.clone()).unwrap(), 0);
            let obs = env.reset();
            assert_eq!(obs.0.len(), 2 * w * w + 9);
            assert_eq!(obs.0[..w * w].iter().sum::<f64>(), 1.0);
            let goals = obs.0[w * w..2 * w * w].iter().sum::<f64>();
            assert_eq!(goals as usize, spec.goals.len());
        }
        assert_eq!(tasks.source[0].max_steps, w * w * 80);
        assert_eq!(tasks.target[0].max_steps, w * w * 16);
    }
}

#[test]
fn target_rewards_and_termination() {
    let tasks = build_task_sets(DomainKind::Combogrid, 3, 0).unwrap();
    let layout = Layout::new(tasks.target[0].clone()).unwrap();
    let up = [0, 0, 1, 1];
    let left = [1, 0, 2, 2];
    let right = [1, 2, 1, 0];
    let down = [0, 2, 2, 1];
    let plan: Vec<usize> = [up, left, right, right, down, down, left, left]
        .iter()
        .flatten()
        .copied()
        .collect();
    let mut state = ComboState::initial(&layout, tasks.target[0].starts[0]);
    let mut total = 0.0;
    let mut last = None;
    for a in plan {
        let (next, res) = combo::step(&state, &layout, a).unwrap();
        total += res.reward;
        state = next;
        last = Some(res);
    }
    let last = last.unwrap();
    assert_eq!(total, 40.0);
    assert!(last.terminal && !last.truncated);
    assert!(combo::step(&state, &layout, 0).is_err());
}

#[test]
fn walls_block_completed_combos() {
    let tasks = build_task_sets(DomainKind::Combogrid, 3, 0).unwrap();
    let spec = &tasks.source[0];
    let layout = Layout::new(spec.clone()).unwrap();
    let start = spec.starts[0];
    let mut state = ComboState::initial(&layout, start);
    for a in [1, 2, 1, 0] {
        state = combo::step(&state, &layout, a).unwrap().0;
    }
    assert_eq!(state.agent, start, "the cell to the right is a wall");
    assert!(state.buffer.is_empty());
    assert_eq!(state.steps_taken, 4);
}
