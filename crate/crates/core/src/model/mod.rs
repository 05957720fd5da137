//! The ConformerGRU classifier.
//!
//! ```text
//! features (frames x 40)
//!   -> pre-net linear + dropout
//!   -> N x conformer layer
//!   -> bidirectional GRU, final states concatenated
//!   -> post-net linear + ReLU
//!   -> prediction linear -> log-softmax
//! ```
//!
//! Forward and backward passes are hand-written and operate on one
//! utterance at a time at its true length, so padding never reaches the model.

mod checkpoint;
mod config;
mod conformer;
mod gru;
mod network;
mod ops;
mod params;
mod scalar;

pub use checkpoint::{Checkpoint, CheckpointMeta, Seeds, FORMAT_VERSION};
pub use config::{param_count, ModelConfig};
pub use network::{
    backward_into, conformer_layer_forward, model_backward, model_forward, predict_log_probs, ForwardTrace,
};
pub use ops::Mode;
pub use params::{
    init_parameters, ConformerLayer, ConvModule, FeedForward, GruDirection, LayerNorm, Linear, Module, Parameters,
    SelfAttention,
};
pub use scalar::Scalar;
