use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, DomainKind, Facing, GridSpec, Layout, Phase};
use crate::error::{Error, Result};

pub const MAZE_SOURCE_SIZE: usize = 9;
pub const MAZE_SOURCE_MAX_STEPS: usize = 1000;
pub const MAZE_TARGET_MAX_STEPS: usize = 361;

/// Source and target tasks sharing one observation space and action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    pub source: Vec<GridSpec>,
    pub target: Vec<GridSpec>,
}

impl TaskSet {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("task sets always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let set: TaskSet = toml::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.source.is_empty() || self.target.is_empty() {
            return Err(Error::Config("task set needs source and target tasks".into()));
        }
        for spec in self.source.iter().chain(&self.target) {
            Layout::new(spec.clone())?;
        }
        let first = &self.source[0];
        let same_space = |s: &GridSpec| match first.kind {
            DomainKind::Combogrid => {
                s.kind == first.kind && s.width == first.width && s.height == first.height
            }
            DomainKind::Maze => s.kind == first.kind,
        };
        if !self.source.iter().chain(&self.target).all(same_space) {
            return Err(Error::Config(
                "all tasks in a set must share one observation space".into(),
            ));
        }
        Ok(())
    }
}

/// Default task sets.
///
/// ComboGrid (`size` in 3..=6): four source tasks that are the quarter-turn
/// rotations of one hook-shaped layout. A wall runs from the middle row
/// towards the left edge, so the shortest route from the start (left end of
/// the middle row) to the goal (just under the wall) circles the whole grid
/// and uses all four moves. The target starts at the centre with a marker in
/// every corner. The layout does not depend on `seed`.
///
/// Maze (`size` is the four-rooms side, 9 or 19): three 9x9 crossing tasks
/// (one wall line with a single gap) and three four-rooms tasks whose goal is
/// in the same, a neighbouring, and the opposite room. Gap and door positions
/// are drawn from `seed`.
pub fn build_task_sets(kind: DomainKind, size: usize, seed: u64) -> Result<TaskSet> {
    let set = match kind {
        DomainKind::Combogrid => combogrid_tasks(size)?,
        DomainKind::Maze => maze_tasks(size, seed)?,
    };
    set.validate()?;
    Ok(set)
}

fn combogrid_tasks(w: usize) -> Result<TaskSet> {
    if !(3..=6).contains(&w) {
        return Err(Error::Config(format!(
            "ComboGrid size must be one of 3, 4, 5, 6 (got {w})"
        )));
    }
    let last = w - 1;
    let corners = [Cell(0, 0), Cell(0, last), Cell(last, 0), Cell(last, last)];
    let mid = w / 2;
    let mut walls: Vec<Cell> = (1..last).map(|c| Cell(mid, c)).collect();
    walls.extend((mid + 1..w).map(|r| Cell(r, 0)));
    let turn = |Cell(r, c): Cell, k: usize| (0..k).fold(Cell(r, c), |Cell(r, c), _| Cell(c, last - r));
    let source = (0..4)
        .map(|k| GridSpec {
            kind: DomainKind::Combogrid,
            phase: Phase::Source,
            width: w,
            height: w,
            walls: walls.iter().map(|&c| turn(c, k)).collect(),
            starts: vec![turn(Cell(mid, 0), k)],
            start_facing: None,
            goals: vec![turn(Cell(mid + 1, 1), k)],
            max_steps: w * w * 80,
        })
        .collect();
    let target = vec![GridSpec {
        kind: DomainKind::Combogrid,
        phase: Phase::Target,
        width: w,
        height: w,
        walls: vec![],
        starts: vec![Cell(w / 2, w / 2)],
        start_facing: None,
        goals: corners.to_vec(),
        max_steps: w * w * 16,
    }];
    Ok(TaskSet { source, target })
}

fn border(n: usize) -> Vec<Cell> {
    let mut walls = Vec::new();
    for i in 0..n {
        walls.push(Cell(0, i));
        walls.push(Cell(n - 1, i));
        if i > 0 && i < n - 1 {
            walls.push(Cell(i, 0));
            walls.push(Cell(i, n - 1));
        }
    }
    walls
}

fn maze_tasks(size: usize, seed: u64) -> Result<TaskSet> {
    if size != 9 && size != 19 {
        return Err(Error::Config(format!(
            "maze four-rooms size must be 9 or 19 (got {size})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = MAZE_SOURCE_SIZE;
    let source = (0..3)
        .map(|_| {
            let mut walls = border(n);
            // Wall line on an even interior index, gap anywhere along it.
            let line = 2 * rng.gen_range(1..=(n - 3) / 2);
            let gap = rng.gen_range(1..n - 1);
            let vertical = rng.gen_bool(0.5);
            for i in 1..n - 1 {
                if i != gap {
                    walls.push(if vertical { Cell(i, line) } else { Cell(line, i) });
                }
            }
            GridSpec {
                kind: DomainKind::Maze,
                phase: Phase::Source,
                width: n,
                height: n,
                walls,
                starts: vec![Cell(1, 1)],
                start_facing: Some(Facing::East),
                goals: vec![Cell(n - 2, n - 2)],
                max_steps: MAZE_SOURCE_MAX_STEPS,
            }
        })
        .collect();

    let mid = size / 2;
    let mut walls = border(size);
    // Doors: one per shared wall segment (upper/lower half of the vertical
    // wall, left/right half of the horizontal wall).
    let door_v_top = rng.gen_range(1..mid);
    let door_v_bottom = rng.gen_range(mid + 1..size - 1);
    let door_h_left = rng.gen_range(1..mid);
    let door_h_right = rng.gen_range(mid + 1..size - 1);
    for i in 1..size - 1 {
        if i != door_v_top && i != door_v_bottom {
            walls.push(Cell(i, mid));
        }
        if i != door_h_left && i != door_h_right && i != mid {
            walls.push(Cell(mid, i));
        }
    }
    let start = Cell(1, 1);
    let goals = [
        Cell(mid - 1, mid - 1),
        Cell(mid - 1, size - 2),
        Cell(size - 2, size - 2),
    ];
    let target = goals
        .iter()
        .map(|&g| GridSpec {
            kind: DomainKind::Maze,
            phase: Phase::Target,
            width: size,
            height: size,
            walls: walls.clone(),
            starts: vec![start],
            start_facing: Some(Facing::East),
            goals: vec![g],
            max_steps: MAZE_TARGET_MAX_STEPS,
        })
        .collect();
    Ok(TaskSet { source, target })
}
