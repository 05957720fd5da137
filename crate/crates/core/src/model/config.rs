use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of the ConformerGRU classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub ff_expansion: usize,
    pub conv_kernel: usize,
    pub gru_hidden: usize,
    pub dropout: f64,
    pub n_classes: usize,
    pub n_features: usize,
    /// Add absolute sinusoidal position encodings after the pre-net.
    #[serde(default)]
    pub positional_encoding: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::with_dims(128, 2, 2)
    }
}

impl ModelConfig {
    /// Default internals for a `(d_model, heads, layers)` cell, GRU width = d_model.
    pub fn with_dims(d_model: usize, n_heads: usize, n_layers: usize) -> Self {
        Self {
            d_model,
            n_heads,
            n_layers,
            ff_expansion: 4,
            conv_kernel: 15,
            gru_hidden: d_model,
            dropout: 0.15,
            n_classes: 41,
            n_features: 40,
            positional_encoding: false,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.d_model == 0 || self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            return fail(format!(
                "d_model {} is not divisible by {} heads",
                self.d_model, self.n_heads
            ));
        }
        if self.conv_kernel.is_multiple_of(2) {
            return fail(format!("conv kernel {} must be odd", self.conv_kernel));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.n_classes < 2 {
            return fail("need at least two classes".into());
        }
        if self.ff_expansion == 0 || self.gru_hidden == 0 || self.n_features == 0 {
            return fail("ff_expansion, gru_hidden and n_features must be positive".into());
        }
        if self.positional_encoding && !self.d_model.is_multiple_of(2) {
            return fail("sinusoidal encoding needs an even d_model".into());
        }
        Ok(())
    }
}

fn linear(fan_in: usize, fan_out: usize) -> usize {
    fan_in * fan_out + fan_out
}

fn layer_norm(d: usize) -> usize {
    2 * d
}

/// Scalar count of the network, derived from the architecture alone.
/// Independent of the head count: heads only partition the projections.
pub fn param_count(config: &ModelConfig) -> usize {
    let d = config.d_model;
    let inner = config.ff_expansion * d;
    let hidden = config.gru_hidden;

    let feed_forward = layer_norm(d) + linear(d, inner) + linear(inner, d);
    let attention = layer_norm(d) + 4 * linear(d, d);
    let convolution = layer_norm(d)
        + linear(d, 2 * d)
        + config.conv_kernel * d
        + d
        + layer_norm(d)
        + linear(d, d);
    let conformer = 2 * feed_forward + attention + convolution + layer_norm(d);
    let gru_direction = linear(d, 3 * hidden) + linear(hidden, 3 * hidden);

    linear(config.n_features, d)
        + config.n_layers * conformer
        + 2 * gru_direction
        + linear(2 * hidden, d)
        + linear(d, config.n_classes)
}
