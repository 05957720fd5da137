use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use kws_core::audio_io::read_wav;
use kws_core::model::Checkpoint;
use kws_core::training::Classifier;

use super::say;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct InferArgs {
    /// 16 kHz mono WAV file
    pub wav: PathBuf,
    /// Checkpoint to run
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Number of labels to print
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Accepted for uniformity; inference is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Prints `rank<TAB>label<TAB>display<TAB>probability`, best first.
pub fn run(args: InferArgs, out: &mut dyn Write) -> CliResult {
    if !args.checkpoint.is_file() {
        return Err(CliError::usage(format!("--checkpoint: {} not found", args.checkpoint.display())));
    }
    if args.top_k == 0 {
        return Err(CliError::usage("--top-k must be at least 1"));
    }
    let classifier = Classifier::new(Checkpoint::load(&args.checkpoint)?)?;
    let wav = read_wav(&args.wav)?;
    let ranked = classifier.top_k(&wav, args.top_k)?;
    let labels = &classifier.checkpoint().meta.labels;
    for (rank, (index, p)) in ranked.iter().enumerate() {
        let label = labels.label(*index).unwrap_or("?");
        let display = labels.display(*index).unwrap_or("-");
        say(out, format!("{}\t{label}\t{display}\t{p:.8}", rank + 1))?;
    }
    Ok(())
}
