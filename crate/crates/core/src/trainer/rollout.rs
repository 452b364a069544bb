use rand::Rng;

use crate::env::{Environment, Observation};
use crate::error::{Error, Result};
use crate::nn::{log_softmax, MlpPolicy, ValueNet};
use crate::option_env::OptionEnv;

/// One decision of a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: usize,
    /// Behaviour-policy log-probability of `action`.
    pub log_prob: f64,
    /// Discounted reward accumulated over the decision.
    pub reward: f64,
    pub value: f64,
    /// Primitive steps the decision took.
    pub kappa: usize,
    pub terminal: bool,
    pub truncated: bool,
    /// Value of the next state used for bootstrapping; zero after terminals.
    pub next_value: f64,
}

impl Transition {
    pub fn episode_end(&self) -> bool {
        self.terminal || self.truncated
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutBuffer {
    pub records: Vec<Transition>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Undiscounted returns of episodes that ended during collection.
    pub episode_returns: Vec<f64>,
    /// Primitive steps taken during collection.
    pub env_steps: usize,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Samples an index from `probs` by inverse CDF.
pub fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Runs the stochastic policy for `n_steps` decisions, resetting episodes as
/// they end. Continues from the environment's current state.
pub fn collect_rollouts<E: Environment>(
    policy: &MlpPolicy,
    value: &ValueNet,
    env: &mut OptionEnv<E>,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Result<RolloutBuffer> {
    if n_steps == 0 {
        return Err(Error::Config("rollouts need at least one step".into()));
    }
    if policy.n_actions() != env.n_actions() {
        return Err(Error::Shape(format!(
            "policy has {} actions, environment offers {}",
            policy.n_actions(),
            env.n_actions()
        )));
    }
    if env.is_done() {
        env.reset();
    }
    let mut buf = RolloutBuffer::default();
    for _ in 0..n_steps {
        let obs = env.observation().clone();
        let logits = policy.logits(&obs)?;
        let logp = log_softmax(&logits);
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let action = sample_categorical(&probs, rng);
        let v = value.value(&obs)?;
        let tr = env.step(action)?;
        buf.env_steps += tr.kappa;
        let next_value = if tr.terminal {
            0.0
        } else {
            value.value(&tr.obs)?
        };
        buf.records.push(Transition {
            obs,
            action,
            log_prob: logp[action],
            reward: tr.reward,
            value: v,
            kappa: tr.kappa,
            terminal: tr.terminal,
            truncated: tr.truncated,
            next_value,
        });
        if tr.done() {
            buf.episode_returns.push(env.episode_return());
            env.reset();
        }
    }
    Ok(buf)
}

/// Generalised advantage estimation over decisions of variable duration:
/// `delta_t = G_t + gamma^kappa_t V(s_{t+1}) - V(s_t)` and
/// `A_t = delta_t + gamma^kappa_t lambda A_{t+1}` within an episode.
pub fn compute_advantages(buf: &mut RolloutBuffer, gamma: f64, lambda: f64) {
    let n = buf.records.len();
    buf.advantages = vec![0.0; n];
    buf.returns = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let r = &buf.records[t];
        let disc = gamma.powi(r.kappa as i32);
        let carry = if r.episode_end() || t + 1 == n { 0.0 } else { next_adv };
        let delta = r.reward + disc * r.next_value - r.value;
        let adv = delta + disc * lambda * carry;
        buf.advantages[t] = adv;
        buf.returns[t] = adv + r.value;
        next_adv = adv;
    }
}
