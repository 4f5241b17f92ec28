//! Joint PPO training of the main networks and the hypernetwork: parallel
//! rollout collection, generalized advantage estimation, and clipped
//! surrogate updates.

pub mod adam;
pub mod train;
pub mod update;

pub use adam::Adam;
pub use train::{train, EnvWorker, TrainOutcome, TrainResume};
pub use update::{ppo_update, UpdateStats};

use serde::{Deserialize, Serialize};

use crate::env::TerminationCause;

/// PPO hyperparameters. Defaults are widely used stable settings; all are
/// configurable from the run config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub clip_ratio: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub n_envs: usize,
    pub n_steps: usize,
    pub iterations: usize,
    /// Write a training checkpoint every N iterations (0 = final only).
    pub checkpoint_every: usize,
    /// Run deterministic evaluation episodes every N iterations (0 = never).
    pub eval_every: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 3e-4,
            clip_ratio: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            epochs: 10,
            minibatch_size: 64,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            n_envs: 16,
            n_steps: 512,
            iterations: 200,
            checkpoint_every: 0,
            eval_every: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if !(0.0 < self.clip_ratio && self.clip_ratio < 1.0) {
            return Err(Error::Config("clip_ratio must be in (0, 1)".into()));
        }
        if !(0.0 < self.discount && self.discount <= 1.0)
            || !(0.0 < self.gae_lambda && self.gae_lambda <= 1.0)
        {
            return Err(Error::Config(
                "discount and gae_lambda must be in (0, 1]".into(),
            ));
        }
        if self.n_envs == 0 || self.n_steps == 0 || self.minibatch_size == 0 {
            return Err(Error::Config(
                "n_envs, n_steps, minibatch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One transition as stored in the rollout buffer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    pub state: Vec<f64>,
    pub lambda: [f64; 6],
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// Episode ended at this transition (the successor state is terminal or
    /// a fresh reset).
    pub done: bool,
}

/// Rollouts from `n_envs` environments over `n_steps` each, stored
/// env-major: index = env · n_steps + step.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    pub n_envs: usize,
    pub n_steps: usize,
    pub samples: Vec<Sample>,
    /// Value estimate of each environment's final (truncation) state.
    pub bootstrap: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Total rewards of episodes completed during collection, in env order.
    pub episode_returns: Vec<f64>,
    pub terminations: Vec<TerminationCause>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Generalized advantage estimation: backward recursion per environment with
/// episode boundaries masking the bootstrap. Fills `advantages` and
/// `returns` (= A + V).
pub fn compute_gae(buffer: &mut RolloutBuffer, discount: f64, gae_lambda: f64) {
    let n = buffer.n_steps;
    buffer.advantages = vec![0.0; buffer.samples.len()];
    buffer.returns = vec![0.0; buffer.samples.len()];
    for env in 0..buffer.n_envs {
        let base = env * n;
        let mut last_gae = 0.0;
        for t in (0..n).rev() {
            let idx = base + t;
            let s = &buffer.samples[idx];
            let nonterminal = if s.done { 0.0 } else { 1.0 };
            let next_value = if t == n - 1 {
                buffer.bootstrap[env]
            } else {
                buffer.samples[idx + 1].value
            };
            let delta = s.reward + discount * next_value * nonterminal - s.value;
            last_gae = delta + discount * gae_lambda * nonterminal * last_gae;
            buffer.advantages[idx] = last_gae;
            buffer.returns[idx] = last_gae + s.value;
        }
    }
}

/// Normalize advantages to zero mean, unit standard deviation over the whole
/// buffer (done once per update, before the surrogate).
pub fn normalize_advantages(advantages: &mut [f64]) {
    let n = advantages.len() as f64;
    if n == 0.0 {
        return;
    }
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        for a in advantages.iter_mut() {
            *a = (*a - mean) / sd;
        }
    } else {
        for a in advantages.iter_mut() {
            *a = 0.0;
        }
    }
}
