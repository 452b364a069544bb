use rand::seq::SliceRandom;
use rand::Rng;

use super::config::{OptimizerConfig, PpoConfig};
use super::rollout::RolloutBuffer;
use crate::error::{Error, Result};
use crate::nn::{log_softmax, Head, Mlp, MlpPolicy, ValueNet};

/// One training example of a minibatch.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub obs: &'a [f64],
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefs {
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub value_loss_coef: f64,
}

impl From<&PpoConfig> for LossCoefs {
    fn from(c: &PpoConfig) -> Self {
        LossCoefs {
            clip_epsilon: c.clip_epsilon,
            entropy_coef: c.entropy_coef,
            value_loss_coef: c.value_loss_coef,
        }
    }
}

/// Minibatch means of the loss terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    pub total: f64,
    /// Clipped surrogate objective (to be maximised).
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Gradients with the shapes of the policy and value networks.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub policy: Mlp,
    pub value: Mlp,
}

impl GradientSet {
    pub fn norm(&self) -> f64 {
        self.policy
            .flat()
            .iter()
            .chain(self.value.flat().iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.policy.is_finite() && self.value.is_finite()
    }

    /// Rescales each network's gradient so its norm is at most `max`.
    fn clip_each(&mut self, max: f64) {
        for net in [&mut self.policy, &mut self.value] {
            let norm = net.flat().iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > max {
                let factor = max / (norm + 1e-6);
                net.params_mut().for_each(|g| *g *= factor);
            }
        }
    }
}

fn require_softmax(policy: &MlpPolicy) -> Result<()> {
    if policy.head != Head::Softmax {
        return Err(Error::UnsupportedArchitecture(
            "training needs a softmax policy head".into(),
        ));
    }
    Ok(())
}

/// Loss `-surrogate + c_v * value_mse - c_e * entropy` and its gradient.
pub fn ppo_gradients(
    policy: &MlpPolicy,
    value: &ValueNet,
    batch: &[Sample<'_>],
    coefs: LossCoefs,
) -> Result<(LossParts, GradientSet)> {
    require_softmax(policy)?;
    if batch.is_empty() {
        return Err(Error::Config("empty minibatch".into()));
    }
    let n = batch.len() as f64;
    let mut grads = GradientSet {
        policy: policy.net.zeros_like(),
        value: value.net.zeros_like(),
    };
    let mut parts = LossParts::default();
    let (lo, hi) = (1.0 - coefs.clip_epsilon, 1.0 + coefs.clip_epsilon);
    for s in batch {
        let cache = policy.net.forward_cached(s.obs)?;
        let logp = log_softmax(cache.output());
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let entropy: f64 = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        let log_ratio = logp[s.action] - s.old_log_prob;
        let ratio = log_ratio.exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(lo, hi) * s.advantage;
        let use_unclipped = unclipped <= clipped;
        parts.surrogate += unclipped.min(clipped);
        parts.entropy += entropy;
        parts.clip_fraction += f64::from(u8::from((ratio - 1.0).abs() > coefs.clip_epsilon));
        parts.approx_kl += (ratio - 1.0) - log_ratio;

        let mut d_logits = vec![0.0; probs.len()];
        for (j, d) in d_logits.iter_mut().enumerate() {
            if use_unclipped {
                let onehot = if j == s.action { 1.0 } else { 0.0 };
                *d -= s.advantage * ratio * (onehot - probs[j]);
            }
            *d += coefs.entropy_coef * probs[j] * (logp[j] + entropy);
            *d /= n;
        }
        policy.net.backward(&cache, &d_logits, &mut grads.policy);

        let vcache = value.net.forward_cached(s.obs)?;
        let err = vcache.output()[0] - s.target;
        parts.value_loss += err * err;
        value
            .net
            .backward(&vcache, &[2.0 * coefs.value_loss_coef * err / n], &mut grads.value);
    }
    parts.surrogate /= n;
    parts.entropy /= n;
    parts.value_loss /= n;
    parts.clip_fraction /= n;
    parts.approx_kl /= n;
    parts.total =
        -parts.surrogate + coefs.value_loss_coef * parts.value_loss - coefs.entropy_coef * parts.entropy;
    if !parts.total.is_finite() || !grads.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite PPO loss: surrogate {}, value loss {}, entropy {}",
            parts.surrogate, parts.value_loss, parts.entropy
        )));
    }
    Ok((parts, grads))
}

/// Loss value only; the reference for finite-difference checks.
pub fn ppo_loss(policy: &MlpPolicy, value: &ValueNet, batch: &[Sample<'_>], coefs: LossCoefs) -> Result<f64> {
    Ok(ppo_gradients(policy, value, batch, coefs)?.0.total)
}

/// Adaptive-moment optimiser state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    config: OptimizerConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(net: &Mlp, config: OptimizerConfig) -> Self {
        let n = net.param_count();
        Adam {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grad: &Mlp, lr: f64) {
        let OptimizerConfig { beta1, beta2, eps, .. } = self.config;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        let g = grad.flat();
        for (i, p) in net.params_mut().enumerate() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// Optimiser state carried across updates.
#[derive(Debug, Clone)]
pub struct PpoState {
    pub policy_opt: Adam,
    pub value_opt: Adam,
}

impl PpoState {
    pub fn new(policy: &MlpPolicy, value: &ValueNet, config: &PpoConfig) -> Self {
        PpoState {
            policy_opt: Adam::new(&policy.net, config.optimizer),
            value_opt: Adam::new(&value.net, config.optimizer),
        }
    }
}

/// Averages over all minibatches of an update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateMetrics {
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub minibatches: usize,
}

fn normalize(values: &mut [f64]) {
    if values.len() < 2 {
        return;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in values.iter_mut() {
        *v = (*v - mean) / (sd + 1e-8);
    }
}

/// Several epochs of shuffled minibatch steps on the clipped objective.
pub fn ppo_update(
    policy: &mut MlpPolicy,
    value: &mut ValueNet,
    state: &mut PpoState,
    buf: &RolloutBuffer,
    config: &PpoConfig,
    rng: &mut impl Rng,
) -> Result<UpdateMetrics> {
    if buf.advantages.len() != buf.len() || buf.returns.len() != buf.len() {
        return Err(Error::Config("advantages must be computed before updating".into()));
    }
    if config.minibatch_size > buf.len() {
        return Err(Error::Config(format!(
            "minibatch of {} exceeds buffer of {}",
            config.minibatch_size,
            buf.len()
        )));
    }
    let coefs = LossCoefs::from(config);
    let mut metrics = UpdateMetrics::default();
    let mut order: Vec<usize> = (0..buf.len()).collect();
    for _ in 0..config.epochs_per_update {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            let mut adv: Vec<f64> = chunk.iter().map(|&i| buf.advantages[i]).collect();
            if config.normalize_advantages {
                normalize(&mut adv);
            }
            let batch: Vec<Sample<'_>> = chunk
                .iter()
                .zip(&adv)
                .map(|(&i, &a)| {
                    let r = &buf.records[i];
                    Sample {
                        obs: &r.obs,
                        action: r.action,
                        old_log_prob: r.log_prob,
                        advantage: a,
                        target: buf.returns[i],
                    }
                })
                .collect();
            let (parts, mut grads) = ppo_gradients(policy, value, &batch, coefs)?;
            if let Some(max) = config.max_grad_norm {
                grads.clip_each(max);
            }
            state.policy_opt.step(&mut policy.net, &grads.policy, config.learning_rate);
            state.value_opt.step(&mut value.net, &grads.value, config.learning_rate);
            metrics.surrogate += parts.surrogate;
            metrics.value_loss += parts.value_loss;
            metrics.entropy += parts.entropy;
            metrics.clip_fraction += parts.clip_fraction;
            metrics.approx_kl += parts.approx_kl;
            metrics.minibatches += 1;
        }
    }
    let k = metrics.minibatches.max(1) as f64;
    metrics.surrogate /= k;
    metrics.value_loss /= k;
    metrics.entropy /= k;
    metrics.clip_fraction /= k;
    metrics.approx_kl /= k;
    Ok(metrics)
}
