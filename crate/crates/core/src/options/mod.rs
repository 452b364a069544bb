//! While-loop options built from sub-policies, the Levin loss of a uniform
//! policy over primitives plus options, and greedy option selection.

mod candidates;
mod levin;
mod library;
mod select;

pub use candidates::{generate_candidates, Candidate, CandidateLimits, CandidateSet};
pub use levin::{compute_loss, is_applicable, min_decisions, uniform_probability, LevinLoss};
pub use library::{read_selection_log, write_selection_log, LibraryEntry, OptionLibrary, LIBRARY_VERSION};
pub use select::{greedy_select, Exclusion, SelectionResult, SelectionStep};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::SubPolicy;
use crate::env::{Environment, Observation};
use crate::error::{Error, Result};
use crate::nn::MlpPolicy;

/// What an option does on each loop iteration.
#[derive(Debug, Clone)]
pub enum OptionBehavior {
    /// Greedy action of a sub-policy at the current observation.
    SubPolicy(SubPolicy),
    /// A fixed primitive sequence, one action per iteration.
    Sequence(Vec<usize>),
}

/// An option that runs its behavior for exactly `z` iterations (fewer if the
/// episode ends first). Options may be initiated in every state.
#[derive(Debug, Clone)]
pub struct OptionDef {
    pub behavior: OptionBehavior,
    pub z: usize,
}

impl OptionDef {
    pub fn from_subpolicy(sub: SubPolicy, z: usize) -> Self {
        assert!(z >= 1, "options loop at least once");
        OptionDef {
            behavior: OptionBehavior::SubPolicy(sub),
            z,
        }
    }

    pub fn from_sequence(actions: Vec<usize>) -> Self {
        assert!(!actions.is_empty(), "options loop at least once");
        OptionDef {
            z: actions.len(),
            behavior: OptionBehavior::Sequence(actions),
        }
    }

    pub fn source_task(&self) -> Option<usize> {
        match &self.behavior {
            OptionBehavior::SubPolicy(s) => Some(s.source_task),
            OptionBehavior::Sequence(_) => None,
        }
    }

    /// Primitive action on loop iteration `iteration` at observation `obs`.
    pub fn action_at(&self, iteration: usize, obs: &[f64]) -> Result<usize> {
        match &self.behavior {
            OptionBehavior::SubPolicy(sub) => sub.greedy_action(obs),
            OptionBehavior::Sequence(seq) => seq
                .get(iteration)
                .copied()
                .ok_or_else(|| Error::Config(format!("iteration {iteration} past sequence end"))),
        }
    }
}

/// Greedy rollout of a policy: `observations` holds `s_0 ..= s_{T+1}` and
/// `actions` holds `a_0 ..= a_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub task: usize,
    pub observations: Vec<Observation>,
    pub actions: Vec<usize>,
    /// The rollout stopped at the step limit instead of a terminal state.
    pub truncated: bool,
}

impl Trajectory {
    pub fn new(task: usize, observations: Vec<Observation>, actions: Vec<usize>) -> Result<Self> {
        if actions.is_empty() || observations.len() != actions.len() + 1 {
            return Err(Error::Shape(format!(
                "trajectory needs one more observation than actions ({} vs {})",
                observations.len(),
                actions.len()
            )));
        }
        Ok(Trajectory {
            task,
            observations,
            actions,
            truncated: false,
        })
    }

    /// Number of states in the sequence, terminal state included.
    pub fn n_states(&self) -> usize {
        self.observations.len()
    }

    /// Number of decisions made by primitives alone (`T + 1`).
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }
}

/// Runs the argmax action of `policy` from a fresh episode until it ends.
pub fn rollout_greedy<E: Environment>(policy: &MlpPolicy, env: &mut E, task: usize) -> Result<Trajectory> {
    let mut obs = env.reset();
    let mut observations = vec![obs.clone()];
    let mut actions = Vec::new();
    loop {
        let a = policy.greedy_action(&obs)?;
        let res = env.step(a)?;
        actions.push(a);
        let done = res.done();
        obs = res.obs;
        observations.push(obs.clone());
        if done {
            let mut traj = Trajectory::new(task, observations, actions)?;
            traj.truncated = res.truncated;
            return Ok(traj);
        }
    }
}

/// `count` options, each replaying its own random primitive sequence of
/// length `length`.
pub fn random_options(n_primitives: usize, length: usize, count: usize, seed: u64) -> Vec<OptionDef> {
    assert!(length >= 1 && count >= 1 && n_primitives >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            OptionDef::from_sequence((0..length).map(|_| rng.gen_range(0..n_primitives)).collect())
        })
        .collect()
}
