//! Carving fixed-length clips out of long noise recordings for the NULL class.

use std::path::Path;

use rand::Rng;

use super::labels::NULL_LABEL;
use super::manifest::{split_counts, ManifestEntry, Source, Split};
use super::wav::{Waveform, DATASET_SAMPLE_RATE};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CarvedClip {
    pub entry: ManifestEntry,
    pub waveform: Waveform,
}

/// Cuts `count` clips of `clip_seconds` at uniform offsets from uniformly
/// chosen sources. Splits are 60/20/20 by count, train taking the rounding
/// remainder. Entry paths point into `clip_dir`; writing the audio is left
/// to the caller.
pub fn carve_noise_clips(
    noise_sources: &[Waveform],
    count: usize,
    clip_seconds: f64,
    seed: u64,
    clip_dir: &Path,
) -> Result<Vec<CarvedClip>> {
    if clip_seconds.is_nan() || clip_seconds <= 0.0 {
        return Err(Error::Config("clip length must be positive".into()));
    }
    for source in noise_sources {
        source.ensure_rate(DATASET_SAMPLE_RATE)?;
    }
    let clip_len = (clip_seconds * f64::from(DATASET_SAMPLE_RATE)).round() as usize;
    let eligible: Vec<&Waveform> = noise_sources.iter().filter(|w| w.len() >= clip_len).collect();
    if eligible.is_empty() {
        return Err(Error::InsufficientMaterial(format!(
            "no noise source is at least {clip_seconds} s long ({} sources given)",
            noise_sources.len()
        )));
    }

    let (n_train, n_dev, _) = split_counts(count, 0.2, 0.2);
    let mut rng = rng::stream(seed, "noise-clips", 0);
    let mut clips = Vec::with_capacity(count);
    for i in 0..count {
        let source = eligible[rng.random_range(0..eligible.len())];
        let offset = rng.random_range(0..=source.len() - clip_len);
        let waveform = source.with_samples(source.samples()[offset..offset + clip_len].to_vec());
        let split = if i < n_train {
            Split::Train
        } else if i < n_train + n_dev {
            Split::Dev
        } else {
            Split::Test
        };
        let id = format!("null/{i:04}");
        clips.push(CarvedClip {
            entry: ManifestEntry {
                id,
                path: clip_dir.join(format!("null_{i:04}.wav")),
                label: NULL_LABEL.to_string(),
                split,
                source: Source::Noise,
                duration_s: waveform.duration_s(),
                display: None,
            },
            waveform,
        });
    }
    Ok(clips)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(len: usize) -> Waveform {
        Waveform::new((0..len).map(|i| i as f64 / len as f64).collect(), 16_000).unwrap()
    }

    fn split_sizes(clips: &[CarvedClip]) -> (usize, usize, usize) {
        let count = |s| clips.iter().filter(|c| c.entry.split == s).count();
        (count(Split::Train), count(Split::Dev), count(Split::Test))
    }

    #[test]
    fn three_hundred_clips_split_60_20_20() {
        let sources = vec![ramp(40_000), ramp(20_000)];
        let clips = carve_noise_clips(&sources, 300, 1.0, 9, Path::new("out")).unwrap();
        assert_eq!(clips.len(), 300);
        assert_eq!(split_sizes(&clips), (180, 60, 60));
        for c in &clips {
            assert_eq!(c.waveform.len(), 16_000);
            assert_eq!(c.entry.label, "NULL");
            assert_eq!(c.entry.source, Source::Noise);
        }
    }

    #[test]
    fn five_clips_split_3_1_1() {
        let clips = carve_noise_clips(&[ramp(16_000)], 5, 1.0, 1, Path::new("o")).unwrap();
        assert_eq!(split_sizes(&clips), (3, 1, 1));
    }

    #[test]
    fn clips_are_verbatim_segments() {
        let src = ramp(20_000);
        let clips = carve_noise_clips(std::slice::from_ref(&src), 4, 0.5, 2, Path::new("o")).unwrap();
        for c in clips {
            let first = c.waveform.samples()[0];
            let offset = src.samples().iter().position(|&s| s == first).unwrap();
            assert_eq!(c.waveform.samples(), &src.samples()[offset..offset + 8000]);
        }
    }

    #[test]
    fn deterministic_and_short_sources_skipped() {
        let sources = vec![ramp(100), ramp(17_000)];
        let a = carve_noise_clips(&sources, 6, 1.0, 5, Path::new("o")).unwrap();
        let b = carve_noise_clips(&sources, 6, 1.0, 5, Path::new("o")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn insufficient_material() {
        assert!(matches!(
            carve_noise_clips(&[], 3, 1.0, 0, Path::new("o")),
            Err(Error::InsufficientMaterial(_))
        ));
        assert!(matches!(
            carve_noise_clips(&[ramp(100)], 3, 1.0, 0, Path::new("o")),
            Err(Error::InsufficientMaterial(_))
        ));
    }
}
