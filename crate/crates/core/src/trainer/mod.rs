//! Clipped-surrogate policy optimisation for a policy/value network pair on
//! one task, with hand-written gradients.

mod config;
mod ppo;
mod rollout;

pub use config::{NetShapes, OptimizerConfig, OptimizerKind, PpoConfig};
pub use ppo::{
    ppo_gradients, ppo_loss, ppo_update, Adam, GradientSet, LossCoefs, LossParts, PpoState, Sample,
    UpdateMetrics,
};
pub use rollout::{collect_rollouts, compute_advantages, sample_categorical, RolloutBuffer, Transition};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::nn::{init_policy, init_value, InitScheme, MlpPolicy, ValueNet};
use crate::option_env::OptionEnv;

/// Mean undiscounted return after an update, indexed by primitive steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub env_step: usize,
    pub mean_episode_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub env_step: usize,
    pub mean_episode_return: f64,
    pub seed: u64,
    pub task_id: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: MlpPolicy,
    pub value: ValueNet,
    pub curve: Vec<CurvePoint>,
    pub metrics: Vec<UpdateMetrics>,
}

/// Trains fresh networks on `env` until `total_env_steps` primitive steps
/// have been taken. After each update the curve records the mean return of
/// the episodes that ended during its rollout; updates with no finished
/// episode repeat the previous value (the running return of the open episode
/// before the first one finishes).
///
/// With `keep_best_greedy`, the argmax policy is evaluated after every update
/// (those steps are not counted) and the latest best-scoring snapshot is
/// returned.
pub fn train_task<E: Environment>(
    env: &mut OptionEnv<E>,
    shapes: &NetShapes,
    config: &PpoConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let policy_seed: u64 = rng.gen();
    let value_seed: u64 = rng.gen();
    let mut policy = init_policy(
        env.obs_len(),
        &shapes.policy_hidden,
        env.n_actions(),
        InitScheme::default(),
        policy_seed,
    );
    let mut value = init_value(env.obs_len(), &shapes.value_hidden, InitScheme::default(), value_seed);
    let mut state = PpoState::new(&policy, &value, config);
    let mut curve = Vec::new();
    let mut metrics = Vec::new();
    let mut steps = 0;
    let mut last: Option<f64> = None;
    let mut best: Option<(f64, MlpPolicy, ValueNet)> = None;
    env.reset();
    while steps < config.total_env_steps {
        let mut buf = collect_rollouts(&policy, &value, env, config.rollout_length, &mut rng)?;
        compute_advantages(&mut buf, config.gamma, config.gae_lambda);
        metrics.push(ppo_update(&mut policy, &mut value, &mut state, &buf, config, &mut rng)?);
        steps += buf.env_steps;
        let ret = if buf.episode_returns.is_empty() {
            last.unwrap_or_else(|| env.episode_return())
        } else {
            buf.episode_returns.iter().sum::<f64>() / buf.episode_returns.len() as f64
        };
        if !buf.episode_returns.is_empty() {
            last = Some(ret);
        }
        curve.push(CurvePoint {
            env_step: steps,
            mean_episode_return: ret,
        });
        if config.keep_best_greedy {
            let g = greedy_return(&policy, env)?;
            env.reset();
            if best.as_ref().is_none_or(|(b, _, _)| g >= *b) {
                best = Some((g, policy.clone(), value.clone()));
            }
        }
    }
    if let Some((_, p, v)) = best {
        policy = p;
        value = v;
    }
    Ok(TrainOutcome {
        policy,
        value,
        curve,
        metrics,
    })
}

/// Undiscounted return of one episode following the argmax action.
pub fn greedy_return<E: Environment>(policy: &MlpPolicy, env: &mut OptionEnv<E>) -> Result<f64> {
    env.reset();
    loop {
        let a = policy.greedy_action(env.observation())?;
        if env.step(a)?.done() {
            return Ok(env.episode_return());
        }
    }
}

pub fn curve_rows(curve: &[CurvePoint], seed: u64, task_id: usize) -> Vec<CurveRow> {
    curve
        .iter()
        .map(|p| CurveRow {
            env_step: p.env_step,
            mean_episode_return: p.mean_episode_return,
            seed,
            task_id,
        })
        .collect()
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_curve(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| Ok(row?)).collect()
}
