//! Synthetic tone corpus for smoke tests and the overfitting check.
//!
//! Command class `k` is a pair of tones whose frequencies are unique to `k`;
//! the NULL class is band-limited noise. Each clip varies amplitude, phase,
//! onset and background noise so no two clips are identical.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::audio_io::{write_wav, LabelMap, ManifestEntry, Source, Split, Waveform, DATASET_SAMPLE_RATE, NULL_LABEL};
use crate::rng;
use crate::{Error, Result};

/// Tone frequencies (Hz) of command class `k`.
pub fn class_tones(k: usize) -> (f64, f64) {
    (300.0 + 220.0 * (k % 7) as f64, 1800.0 + 300.0 * (k / 7) as f64)
}

/// One second of audio for class index `class` of the standard label map.
pub fn toy_clip(class: usize, variant: u64, seed: u64) -> Waveform {
    let labels = LabelMap::standard();
    let n = DATASET_SAMPLE_RATE as usize;
    let mut r = rng::stream(seed, &format!("toy/{class}"), variant);
    let mut samples: Vec<f64> = (0..n).map(|_| r.random_range(-0.01..0.01)).collect();
    if class == labels.null_index() {
        // Smoothed noise with a random level.
        let level = r.random_range(0.05..0.3);
        let mut state = 0.0;
        for s in samples.iter_mut() {
            state = 0.7 * state + 0.3 * r.random_range(-1.0..1.0);
            *s += level * state;
        }
    } else {
        let (fa, fb) = class_tones(class);
        let (aa, ab) = (r.random_range(0.15..0.4), r.random_range(0.15..0.4));
        let (pa, pb) = (r.random_range(0.0..2.0 * PI), r.random_range(0.0..2.0 * PI));
        let onset = r.random_range(0..n / 5);
        let len = r.random_range(n / 2..n - onset);
        for (i, s) in samples.iter_mut().enumerate().skip(onset).take(len) {
            let t = i as f64 / DATASET_SAMPLE_RATE as f64;
            *s += aa * (2.0 * PI * fa * t + pa).sin() + ab * (2.0 * PI * fb * t + pb).sin();
        }
    }
    Waveform::new(samples, DATASET_SAMPLE_RATE).expect("finite samples")
}

/// Writes `root/<label>/<split>_<i>.wav` for every class and returns the
/// manifest, with `per_split` clips per class for train, dev and test.
pub fn write_toy_corpus(root: &Path, per_split: [usize; 3], seed: u64) -> Result<Vec<ManifestEntry>> {
    let labels = LabelMap::standard();
    let mut entries = Vec::new();
    for (class, label) in labels.labels().iter().enumerate() {
        let dir = root.join(label);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut variant = 0;
        for (split, count) in Split::ALL.into_iter().zip(per_split) {
            for i in 0..count {
                let wav = toy_clip(class, variant, seed);
                variant += 1;
                let path = dir.join(format!("{split}_{i}.wav"));
                write_wav(&path, &wav)?;
                entries.push(ManifestEntry {
                    id: format!("{label}/{split}_{i}"),
                    path,
                    label: label.clone(),
                    split,
                    source: if label == NULL_LABEL { Source::Noise } else { Source::Original },
                    duration_s: wav.duration_s(),
                    display: labels.display(class).map(str::to_string),
                });
            }
        }
    }
    Ok(entries)
}
