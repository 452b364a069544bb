//! The environment contract shared by the gridworlds, the option wrapper and
//! the trainer.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Flat observation vector made of one-hot blocks with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation(pub Vec<f64>);

impl Observation {
    pub fn zeros(len: usize) -> Self {
        Observation(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Observation {
    fn from(v: Vec<f64>) -> Self {
        Observation(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    /// The episode reached a terminal state.
    pub terminal: bool,
    /// The episode hit its step limit without terminating.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// A deterministic episodic task with a discrete primitive action set.
pub trait Environment: Send {
    fn n_actions(&self) -> usize;

    fn obs_len(&self) -> usize;

    fn reset(&mut self) -> Observation;

    fn observe(&self) -> Observation;

    fn step(&mut self, action: usize) -> Result<StepResult>;

    /// Primitive steps taken in the current episode.
    fn steps_taken(&self) -> usize;

    fn max_steps(&self) -> usize;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn n_actions(&self) -> usize {
        (**self).n_actions()
    }

    fn obs_len(&self) -> usize {
        (**self).obs_len()
    }

    fn reset(&mut self) -> Observation {
        (**self).reset()
    }

    fn observe(&self) -> Observation {
        (**self).observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        (**self).step(action)
    }

    fn steps_taken(&self) -> usize {
        (**self).steps_taken()
    }

    fn max_steps(&self) -> usize {
        (**self).max_steps()
    }
}
