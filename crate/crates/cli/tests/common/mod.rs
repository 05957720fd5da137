#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kws_core::audio_io::{write_manifest, ManifestEntry, NULL_LABEL};
use kws_core::toy::write_toy_corpus;

pub fn kws(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kws")).args(args).output().expect("kws runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

/// Toy corpus written as a manifest file. Returns the manifest path and entries.
pub fn toy_manifest(dir: &Path, per_split: [usize; 3], seed: u64) -> (PathBuf, Vec<ManifestEntry>) {
    let entries = write_toy_corpus(&dir.join("corpus"), per_split, seed).unwrap();
    let path = dir.join("manifest.jsonl");
    write_manifest(&path, &entries).unwrap();
    (path, entries)
}

/// Toy corpus split into a dataset root of command directories and a
/// separate directory of noise recordings, as `prepare` expects.
pub fn toy_dataset(dir: &Path, clips_per_class: usize) -> (PathBuf, PathBuf) {
    let root = dir.join("dataset");
    write_toy_corpus(&root, [clips_per_class, 0, 0], 5).unwrap();
    let noise = dir.join("noise");
    fs::rename(root.join(NULL_LABEL), &noise).unwrap();
    (root, noise)
}

/// A small run config without augmentation.
pub fn write_run_config(path: &Path, extra_model: &str) {
    let text = format!(
        r#"{{
  "augment": {{"enabled": false}},
  "model": {{"d_model": 16, "n_heads": 2, "n_layers": 1, "ff_expansion": 4, "conv_kernel": 15,
            "gru_hidden": 16, "dropout": 0.15, "n_classes": 41, "n_features": 40{extra_model}}},
  "train": {{"epochs": 1, "batch_size": 16, "log_wall_time": false}}
}}"#
    );
    fs::write(path, text).unwrap();
}
