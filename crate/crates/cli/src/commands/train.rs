use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use kws_core::audio_io::{read_manifest, scan_synthetic, LabelMap, ManifestEntry, Split};
use kws_core::augment::{Augmenter, ImpulseResponseSet, NoiseBank, TimeOp};
use kws_core::model::ModelConfig;
use kws_core::training::{Featurizer, TrainReport, Trainer};

use super::say;
use crate::config::{RunConfig, RESOLVED_CONFIG_FILE};
use crate::error::{CliError, CliResult};

/// Settings shared by `train` and `sweep`. Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manifest produced by `prepare`
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Synthetic command audio added to the train split
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Noise recordings for noise injection
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// One-second impulse responses for reverberation
    #[arg(long)]
    pub rir: Option<PathBuf>,
    /// Total number of epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Initial learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Global gradient-norm clip
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Time-domain augmentation rate
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Frequency-domain augmentation rate
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Train on clean features only
    #[arg(long)]
    pub no_augment: bool,
    /// Write 0 instead of elapsed seconds to the metrics log
    #[arg(long)]
    pub no_wall_time: bool,
    /// Seed for initialisation, shuffling, dropout and augmentation
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunFlags {
    /// The config file (if any) with every given flag applied on top.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut config = match (&self.config, self.epochs) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(epochs)) => RunConfig::new(epochs),
            (None, None) => return Err(CliError::usage("give --config or --epochs")),
        };
        let paths = &mut config.paths;
        for (slot, flag) in [
            (&mut paths.manifest, &self.manifest),
            (&mut paths.output, &self.out),
            (&mut paths.synthetic, &self.synthetic),
            (&mut paths.noise, &self.noise),
            (&mut paths.rir, &self.rir),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        let train = &mut config.train;
        if let Some(v) = self.epochs {
            train.epochs = v;
        }
        if let Some(v) = self.lr {
            train.lr0 = v;
        }
        if let Some(v) = self.batch_size {
            train.batch_size = v;
        }
        if let Some(v) = self.clip_norm {
            train.clip_norm = Some(v);
        }
        if self.no_wall_time {
            train.log_wall_time = false;
        }
        if let Some(v) = self.dropout {
            config.model.dropout = v;
        }
        if let Some(v) = self.lambda {
            config.augment.policy.lambda_rate = v;
        }
        if let Some(v) = self.gamma {
            config.augment.policy.gamma_rate = v;
        }
        if self.no_augment {
            config.augment.enabled = false;
        }
        if let Some(seed) = self.seed {
            config.train.seed = seed;
            config.augment.policy.rng_seed = seed;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunFlags,
    /// Model width
    #[arg(long)]
    pub d_model: Option<usize>,
    /// Attention heads
    #[arg(long)]
    pub heads: Option<usize>,
    /// Conformer layers
    #[arg(long)]
    pub layers: Option<usize>,
    /// GRU hidden width (defaults to the model width)
    #[arg(long)]
    pub gru_hidden: Option<usize>,
}

/// Applies a `(d_model, heads, layers)` choice, keeping the GRU as wide as the
/// model unless it was set explicitly.
pub(crate) fn set_dims(model: &mut ModelConfig, d_model: Option<usize>, heads: Option<usize>, layers: Option<usize>) {
    if let Some(d) = d_model {
        if model.gru_hidden == model.d_model {
            model.gru_hidden = d;
        }
        model.d_model = d;
    }
    if let Some(h) = heads {
        model.n_heads = h;
    }
    if let Some(n) = layers {
        model.n_layers = n;
    }
}

fn augmenter(config: &RunConfig) -> CliResult<Option<Arc<Augmenter>>> {
    if !config.augment.enabled {
        return Ok(None);
    }
    let policy = config.augment.policy.clone();
    let noise = if policy.time_ops.contains(&TimeOp::Noise) {
        let dir = config.paths.noise.as_ref().ok_or_else(|| {
            CliError::usage("noise injection is enabled: give --noise, drop `noise` from time_ops, or pass --no-augment")
        })?;
        Some(NoiseBank::load_dir(dir)?)
    } else {
        None
    };
    let rir = if policy.time_ops.contains(&TimeOp::Reverb) {
        let dir = config.paths.rir.as_ref().ok_or_else(|| {
            CliError::usage("reverberation is enabled: give --rir, drop `reverb` from time_ops, or pass --no-augment")
        })?;
        Some(ImpulseResponseSet::load_dir(dir, policy.normalize_impulse_responses)?)
    } else {
        None
    };
    Ok(Some(Arc::new(Augmenter::new(policy, noise, rir)?)))
}

/// Manifest entries plus any synthetic audio, without duplicate ids.
pub(crate) fn load_entries(config: &RunConfig, labels: &LabelMap) -> CliResult<Vec<ManifestEntry>> {
    let path = config.paths.manifest.as_ref().ok_or_else(|| CliError::usage("give --manifest"))?;
    let mut entries = read_manifest(path)?;
    if let Some(dir) = &config.paths.synthetic {
        let seen: HashSet<String> = entries.iter().map(|e| e.id.clone()).collect();
        entries.extend(scan_synthetic(dir, labels)?.into_iter().filter(|e| !seen.contains(&e.id)));
    }
    for e in &entries {
        e.validate(labels)?;
    }
    Ok(entries)
}

pub(crate) fn build_trainer(config: &RunConfig, labels: &LabelMap) -> CliResult<Trainer> {
    config.validate()?;
    let featurizer = Featurizer::new(config.feature.clone(), augmenter(config)?, config.augment.masks.clone())?;
    Ok(Trainer::new(featurizer, config.model.clone(), config.train.clone(), labels.clone())?)
}

/// Writes the resolved config into `out_dir`, then trains there.
pub(crate) fn train_in(
    config: &RunConfig,
    entries: &[ManifestEntry],
    out_dir: &Path,
    out: &mut dyn Write,
) -> CliResult<TrainReport> {
    let labels = LabelMap::standard();
    let trainer = build_trainer(config, &labels)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut resolved = config.clone();
    resolved.paths.output = Some(out_dir.to_path_buf());
    resolved.save(&out_dir.join(RESOLVED_CONFIG_FILE))?;
    let count = |split| entries.iter().filter(|e| e.split == split).count();
    super::say(
        out,
        format!("train {} / dev {} utterances", count(Split::Train), count(Split::Dev)),
    )?;
    let mut write_error = None;
    let report = trainer.run_with(entries, out_dir, |m| {
        let line = format!(
            "epoch {:>3}  lr {:.3e}  train_loss {:.4}  dev_acc {:.2}",
            m.epoch, m.lr, m.train_loss, m.dev_acc
        );
        if let Err(e) = super::say(out, line) {
            write_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    Ok(report)
}

pub fn run(args: TrainArgs, out: &mut dyn Write) -> CliResult {
    let mut config = args.run.resolve()?;
    set_dims(&mut config.model, args.d_model, args.heads, args.layers);
    if let Some(h) = args.gru_hidden {
        config.model.gru_hidden = h;
    }
    let out_dir = config.paths.output.clone().ok_or_else(|| CliError::usage("give --out"))?;
    config.validate()?;
    let entries = load_entries(&config, &LabelMap::standard())?;
    let report = train_in(&config, &entries, &out_dir, out)?;
    say(
        out,
        format!(
            "best epoch {} dev accuracy {:.2} -> {}",
            report.best_epoch,
            report.best_dev_accuracy,
            report.checkpoint_path.display()
        ),
    )
}
