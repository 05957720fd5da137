use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, OptimizerState};
use super::batch::Batch;
use super::config::TrainConfig;
use super::evaluate::predict_features;
use super::featurize::Featurizer;
use super::metrics::accuracy;
use super::objective::lr_at;
use crate::audio_io::{LabelMap, ManifestEntry, Split};
use crate::model::{backward_into, init_parameters, model_forward, Checkpoint, CheckpointMeta, ModelConfig, Mode, Parameters, Seeds};
use crate::rng::{self, StreamRng};
use crate::{Error, Result};

/// Upper bound on the number of gradient partial sums per batch. The
/// partition depends only on the batch size, so results do not depend on the
/// number of worker threads.
const MAX_PARTIALS: usize = 16;

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const CHECKPOINT_FILE: &str = "best.ckpt";

/// One row of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub dev_acc: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub metrics: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
    pub checkpoint: Checkpoint,
    pub checkpoint_path: PathBuf,
}

/// Mean NLL of `batch` and its gradient. `rngs` supplies one dropout stream
/// per example.
pub fn batch_gradients(
    params: &Parameters<f32>,
    batch: &Batch,
    rngs: Vec<StreamRng>,
) -> Result<(f64, Parameters<f32>)> {
    batch.validate(params.config.n_classes)?;
    let n = batch.len();
    let scale = -1.0 / n as f32;
    let mut items: Vec<(usize, StreamRng)> = rngs.into_iter().enumerate().collect();
    if items.len() != n {
        return Err(Error::Validation(format!("{} dropout streams for {n} examples", items.len())));
    }
    let chunk = n.div_ceil(MAX_PARTIALS.min(n));
    let partials = items
        .par_chunks_mut(chunk)
        .map(|part| {
            let mut grads = params.zeros_like();
            let mut loss = 0.0;
            for (i, r) in part.iter_mut() {
                let trace = model_forward(params, batch.example(*i), Mode::Train(r))?;
                let label = batch.labels[*i];
                loss -= f64::from(trace.log_probs()[label]);
                let mut upstream = Array1::zeros(params.config.n_classes);
                upstream[label] = scale;
                backward_into(params, &trace, &upstream, &mut grads)?;
            }
            Ok((loss, grads))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    let mut grads = params.zeros_like();
    for (loss, g) in &partials {
        total += loss;
        grads.add_assign(g);
    }
    Ok((total / n as f64, grads))
}

/// Mean NLL of `batch` with the given dropout streams, no gradients.
pub fn batch_loss(params: &Parameters<f32>, batch: &Batch, rngs: Vec<StreamRng>) -> Result<f64> {
    batch.validate(params.config.n_classes)?;
    let mut total = 0.0;
    for (i, mut r) in rngs.into_iter().enumerate() {
        let trace = model_forward(params, batch.example(i), Mode::Train(&mut r))?;
        total -= f64::from(trace.log_probs()[batch.labels[i]]);
    }
    Ok(total / batch.len() as f64)
}

/// Rescales `grads` so its global L2 norm is at most `max_norm`.
pub fn clip_global_norm(grads: &mut Parameters<f32>, max_norm: f64) {
    let norm = grads.squared_norm().sqrt();
    if norm > max_norm {
        grads.scale((max_norm / norm) as f32);
    }
}

/// The full optimisation loop over a manifest.
pub struct Trainer {
    featurizer: Featurizer,
    model: ModelConfig,
    config: TrainConfig,
    labels: LabelMap,
}

impl Trainer {
    pub fn new(featurizer: Featurizer, model: ModelConfig, config: TrainConfig, labels: LabelMap) -> Result<Self> {
        model.validate()?;
        config.validate()?;
        if model.n_classes != labels.len() {
            return Err(Error::Config(format!(
                "model has {} classes but the label map has {}",
                model.n_classes,
                labels.len()
            )));
        }
        if model.n_features != featurizer.config().n_mfcc {
            return Err(Error::Config(format!(
                "model expects {} features but the front end produces {}",
                model.n_features,
                featurizer.config().n_mfcc
            )));
        }
        Ok(Self { featurizer, model, config, labels })
    }

    pub fn featurizer(&self) -> &Featurizer {
        &self.featurizer
    }

    fn seeds(&self) -> Seeds {
        let augment = self.featurizer.augmenter().map_or(0, |a| a.policy().rng_seed);
        Seeds { init: self.config.seed, train: self.config.seed, augment }
    }

    fn load_split(&self, entries: &[&ManifestEntry]) -> Result<Vec<(crate::audio_io::Waveform, usize)>> {
        entries
            .par_iter()
            .map(|e| Ok((self.featurizer.load(e)?, self.labels.index(&e.label)?)))
            .collect()
    }

    /// Trains for `epochs`, writing `metrics.jsonl` and `best.ckpt` into `out_dir`.
    pub fn run(&self, manifest: &[ManifestEntry], out_dir: &Path) -> Result<TrainReport> {
        self.run_with(manifest, out_dir, |_| {})
    }

    /// As [`Trainer::run`], calling `on_epoch` after each metrics row is written.
    pub fn run_with(
        &self,
        manifest: &[ManifestEntry],
        out_dir: &Path,
        mut on_epoch: impl FnMut(&EpochMetrics),
    ) -> Result<TrainReport> {
        let train: Vec<&ManifestEntry> = manifest.iter().filter(|e| e.split == Split::Train).collect();
        let dev: Vec<&ManifestEntry> = manifest.iter().filter(|e| e.split == Split::Dev).collect();
        if train.is_empty() || dev.is_empty() {
            return Err(Error::Manifest("training needs non-empty train and dev splits".into()));
        }
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let metrics_path = out_dir.join(METRICS_FILE);
        let checkpoint_path = out_dir.join(CHECKPOINT_FILE);
        let mut metrics_file = File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;

        let train_audio = self.load_split(&train)?;
        let dev_audio = self.load_split(&dev)?;
        let dev_features: Vec<Array2<f32>> =
            dev_audio.par_iter().map(|(w, _)| self.featurizer.clean(w)).collect::<Result<_>>()?;
        let dev_labels: Vec<usize> = dev_audio.iter().map(|(_, y)| *y).collect();
        // Without augmentation the training features never change.
        let fixed_train_features: Option<Vec<Array2<f32>>> = if self.featurizer.augmenter().is_none() {
            Some(train_audio.par_iter().map(|(w, _)| self.featurizer.clean(w)).collect::<Result<_>>()?)
        } else {
            None
        };

        let mut params: Parameters<f32> = init_parameters(&self.model, self.config.seed)?;
        let mut state = OptimizerState::new(&params);
        let adam = AdamConfig {
            beta1: self.config.adam_beta1,
            beta2: self.config.adam_beta2,
            eps: self.config.adam_eps,
        };
        let augment_seed = self.seeds().augment;
        let started = Instant::now();
        let mut metrics = Vec::with_capacity(self.config.epochs);
        let mut best: Option<(usize, f64, Checkpoint)> = None;

        for epoch in 0..self.config.epochs {
            let lr = lr_at(epoch, self.config.epochs, self.config.lr0)?;
            let mut order: Vec<usize> = (0..train.len()).collect();
            order.shuffle(&mut rng::stream(self.config.seed, "shuffle", epoch as u64));
            let mut loss_sum = 0.0;
            for (b, idxs) in order.chunks(self.config.batch_size).enumerate() {
                let context = |source: Error| Error::Training { epoch, batch: b, source: Box::new(source) };
                let examples = idxs
                    .par_iter()
                    .map(|&i| {
                        let features = match &fixed_train_features {
                            Some(f) => f[i].clone(),
                            None => {
                                let mut r = rng::stream(augment_seed, &train[i].id, epoch as u64);
                                self.featurizer.augmented(&train_audio[i].0, &mut r)?
                            }
                        };
                        Ok((features, train_audio[i].1))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(context)?;
                let batch = Batch::from_examples(examples).map_err(context)?;
                let rngs = idxs
                    .iter()
                    .map(|&i| rng::stream(self.config.seed, &format!("dropout/{}", train[i].id), epoch as u64))
                    .collect();
                let (loss, mut grads) = batch_gradients(&params, &batch, rngs).map_err(context)?;
                if let Some(max_norm) = self.config.clip_norm {
                    clip_global_norm(&mut grads, max_norm);
                }
                adam_step(&mut params, &grads, &mut state, lr, &adam).map_err(context)?;
                loss_sum += loss * idxs.len() as f64;
            }

            let predictions = predict_features(&params, &dev_features).map_err(|source| Error::Training {
                epoch,
                batch: usize::MAX,
                source: Box::new(source),
            })?;
            let dev_acc = accuracy(&predictions, &dev_labels)?;
            let row = EpochMetrics {
                epoch,
                lr,
                train_loss: loss_sum / train.len() as f64,
                dev_acc,
                wall_s: if self.config.log_wall_time { started.elapsed().as_secs_f64() } else { 0.0 },
            };
            let line = serde_json::to_string(&row).expect("metrics serialize");
            writeln!(metrics_file, "{line}").map_err(|e| Error::io(&metrics_path, e))?;
            metrics_file.flush().map_err(|e| Error::io(&metrics_path, e))?;
            on_epoch(&row);
            metrics.push(row);

            if best.as_ref().is_none_or(|(_, acc, _)| dev_acc >= *acc) {
                let checkpoint = Checkpoint::new(self.checkpoint_meta(epoch, dev_acc), params.clone())?;
                checkpoint.save(&checkpoint_path)?;
                best = Some((epoch, dev_acc, checkpoint));
            }
        }

        let (best_epoch, best_dev_accuracy, checkpoint) = best.expect("at least one epoch");
        Ok(TrainReport { metrics, best_epoch, best_dev_accuracy, checkpoint, checkpoint_path })
    }

    fn checkpoint_meta(&self, epoch: usize, dev_acc: f64) -> CheckpointMeta {
        let feature_config = self.featurizer.config().clone();
        CheckpointMeta {
            model_config: self.model.clone(),
            feature_fingerprint: feature_config.fingerprint(),
            feature_config,
            labels: self.labels.clone(),
            seeds: self.seeds(),
            epoch,
            dev_accuracy: Some(dev_acc),
        }
    }
}
