//! Primitive environments augmented with options, seen as a semi-Markov
//! decision process: one decision may span several primitive steps.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::env::{Environment, Observation};
use crate::error::{Error, Result};
use crate::options::{OptionBehavior, OptionDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentedAction {
    Primitive(usize),
    Option(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Primitive,
    Option,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Primitive => "primitive",
            ActionKind::Option => "option",
        })
    }
}

/// Outcome of one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SmdpTransition {
    pub obs: Observation,
    /// `sum_k gamma^k r_k` over the primitive steps taken.
    pub reward: f64,
    /// Undiscounted sum of the same rewards.
    pub raw_reward: f64,
    /// Primitive steps taken; the bootstrap discount is `gamma^kappa`.
    pub kappa: usize,
    pub terminal: bool,
    pub truncated: bool,
}

impl SmdpTransition {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub decision_index: usize,
    pub action_kind: ActionKind,
    pub action_id: usize,
    pub kappa: usize,
    pub reward: f64,
}

/// Action space `A ∪ Ω`: indices below `n_primitives` are primitives, the
/// rest are options in library order.
pub struct OptionEnv<E> {
    env: E,
    options: Vec<OptionDef>,
    gamma: f64,
    obs: Observation,
    done: bool,
    episode_return: f64,
    trace: Vec<TraceRow>,
}

impl<E: Environment> OptionEnv<E> {
    pub fn new(mut env: E, options: Vec<OptionDef>, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("discount {gamma} outside [0, 1]")));
        }
        for (i, o) in options.iter().enumerate() {
            match &o.behavior {
                OptionBehavior::SubPolicy(sub) => {
                    if sub.policy.obs_len() != env.obs_len() || sub.policy.n_actions() != env.n_actions() {
                        return Err(Error::Shape(format!(
                            "option {i} expects {} features and {} actions, environment has {} and {}",
                            sub.policy.obs_len(),
                            sub.policy.n_actions(),
                            env.obs_len(),
                            env.n_actions()
                        )));
                    }
                }
                OptionBehavior::Sequence(seq) => {
                    if let Some(&a) = seq.iter().find(|&&a| a >= env.n_actions()) {
                        return Err(Error::InvalidAction {
                            action: a,
                            n_actions: env.n_actions(),
                        });
                    }
                }
            }
        }
        let obs = env.reset();
        Ok(OptionEnv {
            env,
            options,
            gamma,
            obs,
            done: false,
            episode_return: 0.0,
            trace: Vec::new(),
        })
    }

    pub fn n_primitives(&self) -> usize {
        self.env.n_actions()
    }

    pub fn n_options(&self) -> usize {
        self.options.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_primitives() + self.n_options()
    }

    pub fn obs_len(&self) -> usize {
        self.env.obs_len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn inner(&self) -> &E {
        &self.env
    }

    pub fn options(&self) -> &[OptionDef] {
        &self.options
    }

    pub fn decode(&self, action: usize) -> Result<AugmentedAction> {
        let n = self.n_primitives();
        if action < n {
            Ok(AugmentedAction::Primitive(action))
        } else if action < self.n_actions() {
            Ok(AugmentedAction::Option(action - n))
        } else {
            Err(Error::InvalidAction {
                action,
                n_actions: self.n_actions(),
            })
        }
    }

    pub fn reset(&mut self) -> Observation {
        self.obs = self.env.reset();
        self.done = false;
        self.episode_return = 0.0;
        self.trace.clear();
        self.obs.clone()
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Undiscounted return of the current episode so far.
    pub fn episode_return(&self) -> f64 {
        self.episode_return
    }

    /// Primitive steps taken in the current episode.
    pub fn steps_taken(&self) -> usize {
        self.env.steps_taken()
    }

    /// Decisions of the current episode.
    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn step(&mut self, action: usize) -> Result<SmdpTransition> {
        if self.done {
            return Err(Error::EpisodeOver);
        }
        let decoded = self.decode(action)?;
        let (kind, id, z) = match decoded {
            AugmentedAction::Primitive(a) => (ActionKind::Primitive, a, 1),
            AugmentedAction::Option(o) => (ActionKind::Option, o, self.options[o].z),
        };
        let mut out = SmdpTransition {
            obs: self.obs.clone(),
            reward: 0.0,
            raw_reward: 0.0,
            kappa: 0,
            terminal: false,
            truncated: false,
        };
        let mut discount = 1.0;
        for k in 0..z {
            let a = match decoded {
                AugmentedAction::Primitive(a) => a,
                AugmentedAction::Option(o) => self.options[o].action_at(k, &out.obs)?,
            };
            let res = self.env.step(a)?;
            out.reward += discount * res.reward;
            out.raw_reward += res.reward;
            out.kappa += 1;
            discount *= self.gamma;
            out.terminal = res.terminal;
            out.truncated = res.truncated;
            out.obs = res.obs;
            if out.done() {
                break;
            }
        }
        self.obs = out.obs.clone();
        self.done = out.done();
        self.episode_return += out.raw_reward;
        self.trace.push(TraceRow {
            decision_index: self.trace.len(),
            action_kind: kind,
            action_id: id,
            kappa: out.kappa,
            reward: out.reward,
        });
        Ok(out)
    }
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| Ok(row?)).collect()
}
