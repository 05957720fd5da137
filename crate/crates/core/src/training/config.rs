use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn default_lr0() -> f64 {
    1e-3
}
fn default_batch_size() -> usize {
    256
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_true() -> bool {
    true
}

/// Optimisation settings. `epochs` has no default and must always be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_lr0")]
    pub lr0: f64,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    /// Rescale the batch gradient when its global L2 norm exceeds this.
    #[serde(default)]
    pub clip_norm: Option<f64>,
    /// Record elapsed seconds in the metrics log. When off, `wall_s` is 0 and
    /// two runs with equal seeds produce byte-identical logs.
    #[serde(default = "default_true")]
    pub log_wall_time: bool,
}

impl TrainConfig {
    pub fn new(epochs: usize) -> Self {
        Self {
            lr0: default_lr0(),
            epochs,
            batch_size: default_batch_size(),
            seed: 0,
            adam_beta1: default_beta1(),
            adam_beta2: default_beta2(),
            adam_eps: default_eps(),
            clip_norm: None,
            log_wall_time: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail("lr0 must be positive");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return fail("adam betas must lie in [0, 1)");
        }
        if self.adam_eps <= 0.0 {
            return fail("adam_eps must be positive");
        }
        if matches!(self.clip_norm, Some(c) if c <= 0.0 || !c.is_finite()) {
            return fail("clip_norm must be positive");
        }
        Ok(())
    }
}
