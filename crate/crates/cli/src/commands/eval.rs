use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use kws_core::audio_io::{read_manifest, Split};
use kws_core::model::Checkpoint;
use kws_core::training::evaluate;

use super::say;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const CONFUSION_FILE: &str = "confusion.csv";

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Manifest produced by `prepare`
    #[arg(long)]
    pub manifest: PathBuf,
    /// Split to evaluate: train, dev or test
    #[arg(long, default_value = "test")]
    pub split: Split,
    /// Run config whose feature settings must match the checkpoint
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for confusion.csv (defaults to the checkpoint's directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for uniformity; evaluation is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: EvalArgs, out: &mut dyn Write) -> CliResult {
    if !args.checkpoint.is_file() {
        return Err(CliError::usage(format!("--checkpoint: {} not found", args.checkpoint.display())));
    }
    if !args.manifest.is_file() {
        return Err(CliError::usage(format!("--manifest: {} not found", args.manifest.display())));
    }
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let features = match &args.config {
        Some(path) => RunConfig::load(path)?.feature,
        None => checkpoint.meta.feature_config.clone(),
    };
    let entries: Vec<_> = read_manifest(&args.manifest)?.into_iter().filter(|e| e.split == args.split).collect();
    if entries.is_empty() {
        return Err(CliError::usage(format!("manifest has no `{}` entries", args.split)));
    }
    let report = evaluate(&entries, &checkpoint, &features)?;

    let labels = &checkpoint.meta.labels;
    let out_dir = args
        .out
        .clone()
        .or_else(|| args.checkpoint.parent().map(|p| p.to_path_buf()))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(CONFUSION_FILE);
    fs::write(&csv_path, report.confusion.to_csv(labels.labels()))
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", csv_path.display())))?;

    say(out, format!("split {} ({} utterances)", args.split, entries.len()))?;
    say(out, format!("accuracy: {:.2}", report.accuracy))?;
    let counts = report.confusion.counts();
    for (i, label) in labels.labels().iter().enumerate() {
        let total: u64 = counts.row(i).sum();
        if total == 0 {
            continue;
        }
        let display = labels.display(i).unwrap_or("-");
        say(out, format!("  {label:<10} {display:<10} {}/{total}", counts[[i, i]]))?;
    }
    say(out, format!("confusion matrix -> {}", csv_path.display()))
}
