//! Optimisation loop, metrics, evaluation and inference.

mod adam;
mod batch;
mod config;
mod evaluate;
mod featurize;
mod metrics;
mod objective;
mod trainer;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use batch::Batch;
pub use config::TrainConfig;
pub use evaluate::{evaluate, predict_features, Classifier, EvalReport};
pub use featurize::Featurizer;
pub use metrics::{accuracy, argmax, ConfusionMatrix};
pub use objective::{lr_at, nll_loss};
pub use trainer::{
    batch_gradients, batch_loss, clip_global_norm, EpochMetrics, TrainReport, Trainer, CHECKPOINT_FILE,
    METRICS_FILE,
};
