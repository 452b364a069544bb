use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub value_loss_coef: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Decisions collected per update.
    pub rollout_length: usize,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    /// Primitive environment steps over the whole run.
    pub total_env_steps: usize,
    /// Per-network gradient-norm cap; `None` disables clipping.
    pub max_grad_norm: Option<f64>,
    pub normalize_advantages: bool,
    /// Return the snapshot whose argmax policy scored best on the task
    /// instead of the last one.
    pub keep_best_greedy: bool,
    pub optimizer: OptimizerConfig,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 0.005,
            clip_epsilon: 0.2,
            entropy_coef: 0.05,
            value_loss_coef: 0.5,
            gamma: 0.99,
            gae_lambda: 0.95,
            rollout_length: 2048,
            epochs_per_update: 10,
            minibatch_size: 64,
            total_env_steps: 1_000_000,
            max_grad_norm: Some(0.5),
            normalize_advantages: true,
            keep_best_greedy: false,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad("clip_epsilon must lie in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0) || self.entropy_coef < 0.0 || self.value_loss_coef < 0.0 {
            return bad("learning_rate must be positive and loss coefficients non-negative");
        }
        if self.rollout_length == 0 || self.epochs_per_update == 0 || self.minibatch_size == 0 {
            return bad("rollout_length, epochs_per_update and minibatch_size must be positive");
        }
        if self.minibatch_size > self.rollout_length {
            return bad("minibatch_size exceeds rollout_length");
        }
        if matches!(self.max_grad_norm, Some(n) if !(n > 0.0)) {
            return bad("max_grad_norm must be positive");
        }
        let o = &self.optimizer;
        if !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) || !(o.eps > 0.0) {
            return bad("optimizer betas must lie in [0, 1) and eps must be positive");
        }
        Ok(())
    }
}

/// Hidden widths of the policy and value networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetShapes {
    pub policy_hidden: Vec<usize>,
    pub value_hidden: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PpoConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        for f in [
            |c: &mut PpoConfig| c.clip_epsilon = 1.0,
            |c: &mut PpoConfig| c.gamma = 0.0,
            |c: &mut PpoConfig| c.gae_lambda = 1.5,
            |c: &mut PpoConfig| c.minibatch_size = 0,
            |c: &mut PpoConfig| c.minibatch_size = 4096,
            |c: &mut PpoConfig| c.optimizer.beta2 = 1.0,
        ] {
            let mut c = PpoConfig::default();
            f(&mut c);
            assert!(matches!(c.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let c: PpoConfig = toml::from_str("learning_rate = 0.01\n[optimizer]\nbeta1 = 0.8\n").unwrap();
        assert_eq!(c.learning_rate, 0.01);
        assert_eq!(c.optimizer.beta1, 0.8);
        assert_eq!(c.optimizer.beta2, 0.999);
        assert_eq!(c.gamma, 0.99);
        assert!(toml::from_str::<PpoConfig>("learning_rat = 1.0").is_err());
    }
}
