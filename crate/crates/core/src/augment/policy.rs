use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOp {
    Noise,
    Reverb,
    Gain,
    Fade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqOp {
    TimeMask,
    FreqMask,
}

/// Augmentation rates and operator registries.
///
/// An operator is applied when its uniform draw is `>= rate`, so a rate of
/// 0 applies everything and a rate of 1 applies nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationPolicy {
    pub lambda_rate: f64,
    pub gamma_rate: f64,
    pub time_ops: Vec<TimeOp>,
    pub freq_ops: Vec<FreqOp>,
    pub rng_seed: u64,
    /// Scale each impulse response to unit peak magnitude on load.
    #[serde(default)]
    pub normalize_impulse_responses: bool,
}

impl Default for AugmentationPolicy {
    fn default() -> Self {
        Self {
            lambda_rate: 0.5,
            gamma_rate: 0.5,
            time_ops: vec![TimeOp::Noise, TimeOp::Reverb, TimeOp::Gain, TimeOp::Fade],
            freq_ops: vec![FreqOp::TimeMask, FreqOp::FreqMask],
            rng_seed: 0,
            normalize_impulse_responses: false,
        }
    }
}

fn duplicate_free<T: Eq + Hash>(items: &[T]) -> bool {
    let mut seen = HashSet::new();
    items.iter().all(|i| seen.insert(i))
}

impl AugmentationPolicy {
    /// Policy that never selects anything.
    pub fn disabled() -> Self {
        Self {
            lambda_rate: 1.0,
            gamma_rate: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("lambda", self.lambda_rate), ("gamma", self.gamma_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} rate {rate} outside [0, 1]")));
            }
        }
        if self.time_ops.is_empty() || self.freq_ops.is_empty() {
            return Err(Error::Config("operator registries must be non-empty".into()));
        }
        if !duplicate_free(&self.time_ops) || !duplicate_free(&self.freq_ops) {
            return Err(Error::Config("operator registries must not repeat an operator".into()));
        }
        Ok(())
    }
}
