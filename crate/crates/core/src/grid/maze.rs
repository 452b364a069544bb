//! Crossing and four-rooms mazes with turn/turn/forward dynamics and a
//! partially observed, egocentric view.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{draw_start, start_rng, Cell, Layout, Phase};
use crate::env::{Environment, Observation, StepResult};
use crate::error::{Error, Result};

pub const MAZE_ACTIONS: usize = 3;
pub const VIEW_SIZE: usize = 5;
const CELL_CHANNELS: usize = 3;
pub const MAZE_OBS_LEN: usize = VIEW_SIZE * VIEW_SIZE * CELL_CHANNELS + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Facing {
    North,
    East,
    South,
    West,
}

impl Facing {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn turn_left(self) -> Facing {
        match self {
            Facing::North => Facing::West,
            Facing::West => Facing::South,
            Facing::South => Facing::East,
            Facing::East => Facing::North,
        }
    }

    pub fn turn_right(self) -> Facing {
        match self {
            Facing::North => Facing::East,
            Facing::East => Facing::South,
            Facing::South => Facing::West,
            Facing::West => Facing::North,
        }
    }

    /// (drow, dcol) of one step forward.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Facing::North => (-1, 0),
            Facing::East => (0, 1),
            Facing::South => (1, 0),
            Facing::West => (0, -1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeState {
    pub agent: Cell,
    pub facing: Facing,
    pub steps_taken: usize,
    pub done: bool,
}

/// Actions: 0 turns left, 1 turns right, 2 moves forward.
pub fn step(state: &MazeState, layout: &Layout, action: usize) -> Result<(MazeState, StepResult)> {
    if action >= MAZE_ACTIONS {
        return Err(Error::InvalidAction {
            action,
            n_actions: MAZE_ACTIONS,
        });
    }
    if state.done {
        return Err(Error::EpisodeOver);
    }
    let mut next = state.clone();
    next.steps_taken += 1;
    match action {
        0 => next.facing = next.facing.turn_left(),
        1 => next.facing = next.facing.turn_right(),
        _ => {
            let (dr, dc) = next.facing.delta();
            if let Some(cell) = next.agent.offset(dr, dc).filter(|c| layout.is_open(*c)) {
                next.agent = cell;
            }
        }
    }
    let at_goal = layout.goal_index(next.agent).is_some();
    let reward = match (layout.phase(), at_goal) {
        (Phase::Source, true) => 0.0,
        (Phase::Source, false) => -1.0,
        (Phase::Target, true) => 1.0,
        (Phase::Target, false) => 0.0,
    };
    let truncated = !at_goal && next.steps_taken >= layout.max_steps();
    next.done = at_goal || truncated;
    let obs = encode(&next, layout);
    Ok((
        next,
        StepResult {
            obs,
            reward,
            terminal: at_goal,
            truncated,
        },
    ))
}

/// Grid cell seen at window position (`ahead`, `lateral`): `ahead` counts
/// cells in front of the agent (0 is the agent's own row), `lateral` runs
/// 0..5 from the agent's left to its right.
pub fn window_cell(state: &MazeState, ahead: usize, lateral: usize) -> Option<Cell> {
    let (fr, fc) = state.facing.delta();
    let (rr, rc) = state.facing.turn_right().delta();
    let a = ahead as isize;
    let l = lateral as isize - (VIEW_SIZE as isize / 2);
    state.agent.offset(a * fr + l * rr, a * fc + l * rc)
}

/// Window cells visible from the agent: flood fill through open cells inside
/// the window, plus the walls bordering the filled region.
pub fn visibility(state: &MazeState, layout: &Layout) -> [[bool; VIEW_SIZE]; VIEW_SIZE] {
    let cell_at = |a: usize, l: usize| window_cell(state, a, l).filter(|c| layout.in_bounds(*c));
    let mut reached = [[false; VIEW_SIZE]; VIEW_SIZE];
    let mut queue = VecDeque::new();
    let origin = (0usize, VIEW_SIZE / 2);
    reached[origin.0][origin.1] = true;
    queue.push_back(origin);
    while let Some((a, l)) = queue.pop_front() {
        for (da, dl) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
            let (na, nl) = (a as isize + da, l as isize + dl);
            if na < 0 || nl < 0 || na >= VIEW_SIZE as isize || nl >= VIEW_SIZE as isize {
                continue;
            }
            let (na, nl) = (na as usize, nl as usize);
            if reached[na][nl] {
                continue;
            }
            if let Some(c) = cell_at(na, nl) {
                if layout.is_open(c) {
                    reached[na][nl] = true;
                    queue.push_back((na, nl));
                }
            }
        }
    }
    let mut visible = reached;
    for a in 0..VIEW_SIZE {
        for l in 0..VIEW_SIZE {
            if reached[a][l] {
                continue;
            }
            let is_wall = cell_at(a, l).is_some_and(|c| layout.is_wall(c));
            let borders_reached = [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|(da, dl)| {
                    let (na, nl) = (a as isize + da, l as isize + dl);
                    na >= 0
                        && nl >= 0
                        && na < VIEW_SIZE as isize
                        && nl < VIEW_SIZE as isize
                        && reached[na as usize][nl as usize]
                });
            visible[a][l] = is_wall && borders_reached;
        }
    }
    visible
}

/// 5x5 forward window, one (goal, wall, empty) triple per cell with hidden or
/// out-of-bounds cells all zero, followed by a facing one-hot (N, E, S, W).
/// Window rows run from the farthest row down to the agent's row, each row
/// from left to right as the agent sees it.
pub fn encode(state: &MazeState, layout: &Layout) -> Observation {
    let visible = visibility(state, layout);
    let mut v = vec![0.0; MAZE_OBS_LEN];
    for (row, ahead) in (0..VIEW_SIZE).rev().enumerate() {
        for lateral in 0..VIEW_SIZE {
            if !visible[ahead][lateral] {
                continue;
            }
            let Some(cell) = window_cell(state, ahead, lateral) else {
                continue;
            };
            let base = (row * VIEW_SIZE + lateral) * CELL_CHANNELS;
            let channel = if layout.is_wall(cell) {
                1
            } else if layout.goal_index(cell).is_some() {
                0
            } else {
                2
            };
            v[base + channel] = 1.0;
        }
    }
    v[VIEW_SIZE * VIEW_SIZE * CELL_CHANNELS + state.facing.index()] = 1.0;
    Observation(v)
}

#[derive(Debug, Clone)]
pub struct Maze {
    layout: Layout,
    state: MazeState,
    rng: ChaCha8Rng,
}

impl Maze {
    pub fn new(layout: Layout, seed: u64) -> Self {
        let mut rng = start_rng(seed);
        let state = Self::initial(&layout, &mut rng);
        Maze { layout, state, rng }
    }

    fn initial(layout: &Layout, rng: &mut ChaCha8Rng) -> MazeState {
        MazeState {
            agent: draw_start(layout, rng),
            facing: layout.spec().start_facing.unwrap_or(Facing::East),
            steps_taken: 0,
            done: false,
        }
    }

    pub fn state(&self) -> &MazeState {
        &self.state
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }
}

impl Environment for Maze {
    fn n_actions(&self) -> usize {
        MAZE_ACTIONS
    }

    fn obs_len(&self) -> usize {
        MAZE_OBS_LEN
    }

    fn reset(&mut self) -> Observation {
        self.state = Self::initial(&self.layout, &mut self.rng);
        self.observe()
    }

    fn observe(&self) -> Observation {
        encode(&self.state, &self.layout)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        let (next, res) = step(&self.state, &self.layout, action)?;
        self.state = next;
        Ok(res)
    }

    fn steps_taken(&self) -> usize {
        self.state.steps_taken
    }

    fn max_steps(&self) -> usize {
        self.layout.max_steps()
    }
}
