use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every hyperparameter of the training loop. Defaults are the standard
/// TD3/DS-TD3 settings, with desk-scale step counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Topology strategy, resolved through [`super::StrategyRegistry`].
    pub mode: String,
    pub gamma: f64,
    pub tau: f64,
    pub policy_delay: u64,
    pub evolution_period: u64,
    pub eta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Exploration noise std, as a fraction of `max_action`.
    pub exploration_noise: f64,
    pub target_noise: f64,
    pub noise_clip: f64,
    pub batch_size: usize,
    pub total_steps: u64,
    pub warmup_steps: u64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_action: f64,
    pub hidden: Vec<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            mode: "dynamic".into(),
            gamma: 0.99,
            tau: 0.005,
            policy_delay: 2,
            evolution_period: 1000,
            eta: 0.05,
            lambda1: 7.0,
            lambda2: 64.0,
            exploration_noise: 0.1,
            target_noise: 0.2,
            noise_clip: 0.5,
            batch_size: 100,
            total_steps: 30_000,
            warmup_steps: 1000,
            learning_rate: 0.001,
            weight_decay: 0.0002,
            max_action: 1.0,
            hidden: vec![256, 256],
        }
    }
}

impl AgentConfig {
    /// Step counts of a full-length (one million step) run.
    pub fn full_scale() -> Self {
        Self {
            total_steps: 1_000_000,
            warmup_steps: 25_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, reason: &str| if ok { Ok(()) } else { Err(Error::config(key, reason)) };
        check(self.gamma > 0.0 && self.gamma <= 1.0, "gamma", "must lie in (0, 1]")?;
        check(self.tau > 0.0 && self.tau <= 1.0, "tau", "must lie in (0, 1]")?;
        check(self.policy_delay >= 1, "policy_delay", "must be at least 1")?;
        check(self.evolution_period >= 1, "evolution_period", "must be at least 1")?;
        check(
            self.evolution_period.is_multiple_of(self.policy_delay),
            "evolution_period",
            "must be a multiple of policy_delay",
        )?;
        check((0.0..1.0).contains(&self.eta), "eta", "must lie in [0, 1)")?;
        check(self.lambda1 >= 0.0 && self.lambda1.is_finite(), "lambda1", "must be non-negative")?;
        check(self.lambda2 >= 0.0 && self.lambda2.is_finite(), "lambda2", "must be non-negative")?;
        check(self.exploration_noise >= 0.0, "exploration_noise", "must be non-negative")?;
        check(self.target_noise >= 0.0, "target_noise", "must be non-negative")?;
        check(self.noise_clip > 0.0, "noise_clip", "must be positive")?;
        check(self.batch_size >= 1, "batch_size", "must be at least 1")?;
        check(self.total_steps >= 1, "steps", "must be at least 1")?;
        check(self.learning_rate > 0.0, "lr", "must be positive")?;
        check(self.weight_decay >= 0.0, "weight_decay", "must be non-negative")?;
        check(self.max_action > 0.0, "max_action", "must be positive")?;
        check(
            !self.hidden.is_empty() && self.hidden.iter().all(|h| *h >= 1),
            "hidden",
            "needs at least one positive layer width",
        )?;
        Ok(())
    }

    /// Sparsity control for hidden-input layer `layer`.
    pub fn lambda_for(&self, layer: usize) -> f64 {
        if layer == 0 {
            self.lambda1
        } else {
            self.lambda2
        }
    }
}
