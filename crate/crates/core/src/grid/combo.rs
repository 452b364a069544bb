//! ComboGrid: the agent moves one cell only after completing a fixed
//! four-action combo.

use rand_chacha::ChaCha8Rng;

use super::{draw_start, start_rng, Cell, Layout, Phase};
use crate::env::{Environment, Observation, StepResult};
use crate::error::{Error, Result};

pub const COMBO_ACTIONS: usize = 3;
pub const BUFFER_SLOTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Down,
    Up,
    Right,
    Left,
}

impl Move {
    pub fn delta(self) -> (isize, isize) {
        match self {
            Move::Down => (1, 0),
            Move::Up => (-1, 0),
            Move::Right => (0, 1),
            Move::Left => (0, -1),
        }
    }
}

pub const COMBOS: [(Move, [usize; 4]); 4] = [
    (Move::Down, [0, 2, 2, 1]),
    (Move::Up, [0, 0, 1, 1]),
    (Move::Right, [1, 2, 1, 0]),
    (Move::Left, [1, 0, 2, 2]),
];

/// True iff `buffer` is a strict prefix of some combo.
pub fn combo_buffer_is_valid(buffer: &[usize]) -> bool {
    buffer.len() < 4 && COMBOS.iter().any(|(_, c)| c.starts_with(buffer))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComboState {
    pub agent: Cell,
    pub buffer: Vec<usize>,
    pub collected: Vec<bool>,
    pub steps_taken: usize,
    pub done: bool,
}

impl ComboState {
    pub fn initial(layout: &Layout, start: Cell) -> Self {
        ComboState {
            agent: start,
            buffer: Vec::with_capacity(BUFFER_SLOTS),
            collected: vec![false; layout.spec().goals.len()],
            steps_taken: 0,
            done: false,
        }
    }
}

/// One primitive step. Pure: the input state is left untouched.
pub fn step(state: &ComboState, layout: &Layout, action: usize) -> Result<(ComboState, StepResult)> {
    if action >= COMBO_ACTIONS {
        return Err(Error::InvalidAction {
            action,
            n_actions: COMBO_ACTIONS,
        });
    }
    if state.done {
        return Err(Error::EpisodeOver);
    }
    let mut next = state.clone();
    next.steps_taken += 1;
    next.buffer.push(action);

    if let Some((mv, _)) = COMBOS.iter().find(|(_, c)| c[..] == next.buffer[..]) {
        let (dr, dc) = mv.delta();
        if let Some(cell) = next.agent.offset(dr, dc).filter(|c| layout.is_open(*c)) {
            next.agent = cell;
        }
        next.buffer.clear();
    } else if !combo_buffer_is_valid(&next.buffer) {
        next.buffer.clear();
    }

    let (reward, terminal) = match layout.phase() {
        Phase::Source => {
            if layout.goal_index(next.agent).is_some() {
                (0.0, true)
            } else {
                (-1.0, false)
            }
        }
        Phase::Target => {
            let mut reward = 0.0;
            if let Some(g) = layout.goal_index(next.agent) {
                if !next.collected[g] {
                    next.collected[g] = true;
                    reward = 10.0;
                }
            }
            (reward, next.collected.iter().all(|&c| c))
        }
    };
    let truncated = !terminal && next.steps_taken >= layout.max_steps();
    next.done = terminal || truncated;
    let obs = encode(&next, layout);
    Ok((
        next,
        StepResult {
            obs,
            reward,
            terminal,
            truncated,
        },
    ))
}

/// Observation layout: `W*H` one-hot agent cell, `W*H` multi-hot uncollected
/// goals, then `3 slots x 3 actions` one-hot combo buffer (zero padded).
pub fn encode(state: &ComboState, layout: &Layout) -> Observation {
    let cells = layout.width() * layout.height();
    let mut v = vec![0.0; obs_len(layout)];
    let idx = |c: Cell| c.row() * layout.width() + c.col();
    v[idx(state.agent)] = 1.0;
    for (g, collected) in layout.spec().goals.iter().zip(&state.collected) {
        if !collected {
            v[cells + idx(*g)] = 1.0;
        }
    }
    for (slot, &a) in state.buffer.iter().enumerate() {
        v[2 * cells + slot * COMBO_ACTIONS + a] = 1.0;
    }
    Observation(v)
}

pub fn obs_len(layout: &Layout) -> usize {
    2 * layout.width() * layout.height() + BUFFER_SLOTS * COMBO_ACTIONS
}

#[derive(Debug, Clone)]
pub struct ComboGrid {
    layout: Layout,
    state: ComboState,
    rng: ChaCha8Rng,
}

impl ComboGrid {
    pub fn new(layout: Layout, seed: u64) -> Self {
        let mut rng = start_rng(seed);
        let start = draw_start(&layout, &mut rng);
        let state = ComboState::initial(&layout, start);
        ComboGrid { layout, state, rng }
    }

    pub fn state(&self) -> &ComboState {
        &self.state
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn set_state(&mut self, state: ComboState) {
        self.state = state;
    }
}

impl Environment for ComboGrid {
    fn n_actions(&self) -> usize {
        COMBO_ACTIONS
    }

    fn obs_len(&self) -> usize {
        obs_len(&self.layout)
    }

    fn reset(&mut self) -> Observation {
        let start = draw_start(&self.layout, &mut self.rng);
        self.state = ComboState::initial(&self.layout, start);
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
