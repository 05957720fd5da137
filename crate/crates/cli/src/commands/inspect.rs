use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use kws_core::model::{param_count, Checkpoint, FORMAT_VERSION};

use super::say;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Checkpoint file
    pub checkpoint: PathBuf,
    /// Also list every tensor with its shape
    #[arg(long)]
    pub tensors: bool,
    /// Accepted for uniformity; has no effect
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: InspectArgs, out: &mut dyn Write) -> CliResult {
    if !args.checkpoint.is_file() {
        return Err(CliError::usage(format!("{} not found", args.checkpoint.display())));
    }
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    let meta = &ckpt.meta;
    let model = serde_json::to_string(&meta.model_config).expect("config serializes");
    say(out, format!("format_version: {FORMAT_VERSION}"))?;
    say(out, format!("epoch: {}", meta.epoch))?;
    match meta.dev_accuracy {
        Some(acc) => say(out, format!("dev_accuracy: {acc:.2}"))?,
        None => say(out, "dev_accuracy: -")?,
    }
    say(out, format!("model: {model}"))?;
    say(out, format!("parameters: {}", param_count(&meta.model_config)))?;
    say(out, format!("features: {}", meta.feature_fingerprint))?;
    say(out, format!("labels: {}", meta.labels.len()))?;
    say(
        out,
        format!("seeds: init={} train={} augment={}", meta.seeds.init, meta.seeds.train, meta.seeds.augment),
    )?;
    if args.tensors {
        for (name, t) in ckpt.params.named_tensors() {
            say(out, format!("  {name} {:?}", t.shape()))?;
        }
    }
    Ok(())
}
