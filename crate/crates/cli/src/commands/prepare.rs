use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use kws_core::audio_io::{
    build_manifest, carve_noise_clips, read_wav_dir, write_manifest, write_wav, LabelMap, Split, SplitSpec,
};

use super::say;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const NOISE_CLIP_DIR: &str = "noise_clips";

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Dataset root with one directory of WAV files per command
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory of noise recordings to carve NULL-class clips from
    #[arg(long)]
    pub noise: PathBuf,
    /// Directory of synthetic command audio, laid out like the dataset (train split only)
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Explicit split file with `<label>/<file>,<split>` lines; overrides the fractions
    #[arg(long)]
    pub split_file: Option<PathBuf>,
    /// Fraction of each command's files assigned to dev
    #[arg(long, default_value_t = 0.2)]
    pub dev_fraction: f64,
    /// Fraction of each command's files assigned to test
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Number of NULL-class clips to carve
    #[arg(long, default_value_t = 300)]
    pub noise_clips: usize,
    /// Length of each carved clip in seconds
    #[arg(long, default_value_t = 1.0)]
    pub clip_seconds: f64,
    /// Output directory for manifest.jsonl and the carved clips
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for split assignment and clip carving
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: PrepareArgs, out: &mut dyn Write) -> CliResult {
    for (flag, path) in [("--dataset", &args.dataset), ("--noise", &args.noise)] {
        if !path.is_dir() {
            return Err(CliError::usage(format!("{flag}: {} is not a directory", path.display())));
        }
    }
    if let Some(dir) = &args.synthetic {
        if !dir.is_dir() {
            return Err(CliError::usage(format!("--synthetic: {} is not a directory", dir.display())));
        }
    }
    let spec = match &args.split_file {
        Some(path) => SplitSpec::read_explicit(path)?,
        None => SplitSpec::Fractions {
            train: 1.0 - args.dev_fraction - args.test_fraction,
            dev: args.dev_fraction,
            test: args.test_fraction,
        },
    };
    let labels = LabelMap::standard();
    let mut entries = build_manifest(&args.dataset, args.synthetic.as_deref(), &spec, args.seed, &labels)?;

    let sources = read_wav_dir(&args.noise)?;
    let clip_dir = args.out.join(NOISE_CLIP_DIR);
    fs::create_dir_all(&clip_dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", clip_dir.display())))?;
    for clip in carve_noise_clips(&sources, args.noise_clips, args.clip_seconds, args.seed, &clip_dir)? {
        write_wav(&clip.entry.path, &clip.waveform)?;
        entries.push(clip.entry);
    }

    let manifest_path = args.out.join(MANIFEST_FILE);
    write_manifest(&manifest_path, &entries)?;

    let mut per_split: BTreeMap<&str, usize> = BTreeMap::new();
    let mut per_label: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &entries {
        *per_split.entry(e.split.as_str()).or_default() += 1;
        *per_label.entry(e.label.as_str()).or_default() += 1;
    }
    say(out, format!("wrote {} entries to {}", entries.len(), manifest_path.display()))?;
    for split in Split::ALL {
        say(out, format!("  {:<5} {}", split.as_str(), per_split.get(split.as_str()).copied().unwrap_or(0)))?;
    }
    say(out, format!("  labels covered: {}/{}", per_label.len(), labels.len()))?;
    Ok(())
}
