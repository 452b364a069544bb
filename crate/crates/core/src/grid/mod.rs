//! Deterministic gridworld tasks: ComboGrid and the crossing / four-rooms
//! mazes.

pub mod combo;
pub mod maze;
mod tasks;

pub use combo::{
    combo_buffer_is_valid, ComboGrid, ComboState, Move, BUFFER_SLOTS, COMBOS, COMBO_ACTIONS,
};
pub use maze::{Facing, Maze, MazeState, MAZE_OBS_LEN, VIEW_SIZE};
pub use tasks::{build_task_sets, TaskSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Environment, Observation, StepResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell(pub usize, pub usize);

impl Cell {
    pub fn row(self) -> usize {
        self.0
    }

    pub fn col(self) -> usize {
        self.1
    }

    /// Offsets the cell, returning `None` when leaving the first quadrant.
    pub fn offset(self, drow: isize, dcol: isize) -> Option<Cell> {
        let r = self.0 as isize + drow;
        let c = self.1 as isize + dcol;
        (r >= 0 && c >= 0).then_some(Cell(r as usize, c as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Combogrid,
    Maze,
}

/// Source tasks are the ones policies are learned on first; target tasks are
/// the transfer tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: DomainKind,
    pub phase: Phase,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub walls: Vec<Cell>,
    /// Start-state candidates; a reset draws uniformly among them.
    pub starts: Vec<Cell>,
    /// Initial heading for maze tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_facing: Option<Facing>,
    pub goals: Vec<Cell>,
    pub max_steps: usize,
}

/// A validated [`GridSpec`] with a dense wall lookup.
#[derive(Debug, Clone)]
pub struct Layout {
    spec: GridSpec,
    wall: Vec<bool>,
}

impl Layout {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let (w, h) = (spec.width, spec.height);
        if w == 0 || h == 0 {
            return Err(Error::Config("grid dimensions must be positive".into()));
        }
        if spec.goals.is_empty() {
            return Err(Error::Config("a task needs at least one goal".into()));
        }
        if spec.starts.is_empty() {
            return Err(Error::Config("a task needs at least one start cell".into()));
        }
        if spec.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        let in_bounds = |c: &Cell| c.row() < h && c.col() < w;
        let mut wall = vec![false; w * h];
        for c in &spec.walls {
            if !in_bounds(c) {
                return Err(Error::Config(format!("wall {c:?} outside the {w}x{h} grid")));
            }
            wall[c.row() * w + c.col()] = true;
        }
        for c in spec.starts.iter().chain(&spec.goals) {
            if !in_bounds(c) {
                return Err(Error::Config(format!("cell {c:?} outside the {w}x{h} grid")));
            }
            if wall[c.row() * w + c.col()] {
                return Err(Error::Config(format!("cell {c:?} lies inside a wall")));
            }
        }
        Ok(Layout { spec, wall })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn width(&self) -> usize {
        self.spec.width
    }

    pub fn height(&self) -> usize {
        self.spec.height
    }

    pub fn phase(&self) -> Phase {
        self.spec.phase
    }

    pub fn max_steps(&self) -> usize {
        self.spec.max_steps
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.row() < self.spec.height && c.col() < self.spec.width
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.wall[c.row() * self.spec.width + c.col()]
    }

    /// In bounds and not a wall.
    pub fn is_open(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.wall[c.row() * self.spec.width + c.col()]
    }

    pub fn goal_index(&self, c: Cell) -> Option<usize> {
        self.spec.goals.iter().position(|g| *g == c)
    }
}

/// Either gridworld behind the [`Environment`] trait.
#[derive(Debug, Clone)]
pub enum GridEnv {
    Combo(ComboGrid),
    Maze(Maze),
}

impl GridEnv {
    pub fn new(spec: GridSpec, seed: u64) -> Result<Self> {
        let kind = spec.kind;
        let layout = Layout::new(spec)?;
        Ok(match kind {
            DomainKind::Combogrid => GridEnv::Combo(ComboGrid::new(layout, seed)),
            DomainKind::Maze => GridEnv::Maze(Maze::new(layout, seed)),
        })
    }

    fn inner(&self) -> &dyn Environment {
        match self {
            GridEnv::Combo(e) => e,
            GridEnv::Maze(e) => e,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Environment {
        match self {
            GridEnv::Combo(e) => e,
            GridEnv::Maze(e) => e,
        }
    }
}

impl Environment for GridEnv {
    fn n_actions(&self) -> usize {
        self.inner().n_actions()
    }

    fn obs_len(&self) -> usize {
        self.inner().obs_len()
    }

    fn reset(&mut self) -> Observation {
        self.inner_mut().reset()
    }

    fn observe(&self) -> Observation {
        self.inner().observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.inner_mut().step(action)
    }

    fn steps_taken(&self) -> usize {
        self.inner().steps_taken()
    }

    fn max_steps(&self) -> usize {
        self.inner().max_steps()
    }
}

/// Picks a start cell; single-candidate specs never touch the RNG.
pub(crate) fn draw_start(layout: &Layout, rng: &mut ChaCha8Rng) -> Cell {
    let starts = &layout.spec().starts;
    if starts.len() == 1 {
        starts[0]
    } else {
        starts[rng.gen_range(0..starts.len())]
    }
}

pub(crate) fn start_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
