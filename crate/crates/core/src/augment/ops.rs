//! Noise injection, reverberation and random gain.

use std::path::Path;

use rand::Rng;

use crate::audio_io::{read_wav_dir, Waveform, DATASET_SAMPLE_RATE};
use crate::{Error, Result};

/// Shortest reverberation tail: 31 ms at 16 kHz.
pub const REVERB_MIN_SAMPLES: usize = 496;
/// Longest reverberation tail: 250 ms at 16 kHz.
pub const REVERB_MAX_SAMPLES: usize = 4000;
pub const GAIN_MIN: f64 = 0.2;
pub const GAIN_MAX: f64 = 2.0;

const IMPULSE_RESPONSE_LEN: usize = DATASET_SAMPLE_RATE as usize;

/// All noise recordings concatenated into one long signal.
#[derive(Debug, Clone)]
pub struct NoiseBank {
    signal: Waveform,
}

impl NoiseBank {
    pub fn new(signal: Waveform) -> Result<Self> {
        signal.ensure_rate(DATASET_SAMPLE_RATE)?;
        if signal.is_empty() {
            return Err(Error::InsufficientMaterial("noise bank is empty".into()));
        }
        Ok(Self { signal })
    }

    pub fn from_recordings(recordings: &[Waveform]) -> Result<Self> {
        for r in recordings {
            r.ensure_rate(DATASET_SAMPLE_RATE)?;
        }
        let samples = recordings.iter().flat_map(|r| r.samples().iter().copied()).collect();
        Self::new(Waveform::from_trusted(samples, DATASET_SAMPLE_RATE))
    }

    /// Loads and concatenates every `.wav` in `dir` in file-name order.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        Self::from_recordings(&read_wav_dir(dir)?)
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        self.signal.samples()
    }
}

/// Non-empty set of one-second impulse responses.
#[derive(Debug, Clone)]
pub struct ImpulseResponseSet {
    responses: Vec<Waveform>,
}

impl ImpulseResponseSet {
    pub fn new(responses: Vec<Waveform>, normalize_peak: bool) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::InsufficientMaterial("no impulse responses".into()));
        }
        for r in &responses {
            r.ensure_rate(DATASET_SAMPLE_RATE)?;
            if r.len() != IMPULSE_RESPONSE_LEN {
                return Err(Error::Validation(format!(
                    "impulse response has {} samples, expected {IMPULSE_RESPONSE_LEN}",
                    r.len()
                )));
            }
        }
        let responses = if normalize_peak {
            responses
                .into_iter()
                .map(|r| {
                    let peak = r.samples().iter().fold(0.0f64, |m, s| m.max(s.abs()));
                    if peak > 0.0 {
                        r.with_samples(r.samples().iter().map(|s| s / peak).collect())
                    } else {
                        r
                    }
                })
                .collect()
        } else {
            responses
        };
        Ok(Self { responses })
    }

    /// Loads every `.wav` in `dir`, truncating or zero-padding each to one second.
    pub fn load_dir(dir: impl AsRef<Path>, normalize_peak: bool) -> Result<Self> {
        let responses = read_wav_dir(dir)?
            .into_iter()
            .map(|w| {
                let mut s = w.samples().to_vec();
                s.resize(IMPULSE_RESPONSE_LEN, 0.0);
                w.with_samples(s)
            })
            .collect();
        Self::new(responses, normalize_peak)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Waveform> {
        self.responses.get(index)
    }
}

/// Random choices for one noise injection.
///
/// `start..end` is the slice of the bank, `offset` the number of leading
/// zeros before it, and `gain` the mixing gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraw {
    pub start: usize,
    pub end: usize,
    pub offset: usize,
    pub gain: f64,
}

impl NoiseDraw {
    pub fn sample<R: Rng + ?Sized>(bank_len: usize, signal_len: usize, rng: &mut R) -> Self {
        let start = rng.random_range(0..bank_len);
        let end = rng.random_range(start..=bank_len.min(start + signal_len));
        // clamped at 0 so a segment spanning the whole signal stays legal
        let max_offset = signal_len.saturating_sub(end - start).saturating_sub(1);
        let offset = rng.random_range(0..=max_offset);
        let gain = rng.random::<f64>();
        Self {
            start,
            end,
            offset,
            gain,
        }
    }

    /// The zero-padded noise segment, `signal_len` samples long.
    pub fn segment(&self, bank: &NoiseBank, signal_len: usize) -> Result<Vec<f64>> {
        let seg_len = self.end.checked_sub(self.start).unwrap_or(usize::MAX);
        if self.end > bank.len() || seg_len > signal_len || self.offset + seg_len > signal_len {
            return Err(Error::Validation(format!(
                "noise draw {self:?} does not fit bank of {} / signal of {signal_len}",
                bank.len()
            )));
        }
        let mut xi = vec![0.0; signal_len];
        xi[self.offset..self.offset + seg_len].copy_from_slice(&bank.samples()[self.start..self.end]);
        Ok(xi)
    }

    pub fn apply(&self, x: &Waveform, bank: &NoiseBank) -> Result<Waveform> {
        let xi = self.segment(bank, x.len())?;
        Ok(x.with_samples(x.samples().iter().zip(&xi).map(|(s, n)| self.gain * n + s).collect()))
    }
}

/// Random choices for one reverberation: which response and how many taps
/// beyond the first (`taps = length + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReverbDraw {
    pub response: usize,
    pub length: usize,
}

impl ReverbDraw {
    pub fn sample<R: Rng + ?Sized>(irs: &ImpulseResponseSet, rng: &mut R) -> Self {
        Self {
            response: rng.random_range(0..irs.len()),
            length: rng.random_range(REVERB_MIN_SAMPLES..=REVERB_MAX_SAMPLES),
        }
    }

    pub fn apply(&self, x: &Waveform, irs: &ImpulseResponseSet) -> Result<Waveform> {
        let h = irs
            .get(self.response)
            .ok_or_else(|| Error::Validation(format!("no impulse response {}", self.response)))?;
        let taps = (self.length + 1).min(h.len());
        Ok(x.with_samples(convolve_truncated(x.samples(), &h.samples()[..taps])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDraw(pub f64);

impl GainDraw {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        GainDraw(rng.random_range(GAIN_MIN..GAIN_MAX))
    }

    pub fn apply(&self, x: &Waveform) -> Waveform {
        x.with_samples(x.samples().iter().map(|s| self.0 * s).collect())
    }
}

/// Causal convolution `y[n] = sum_i h[i] x[n - i]`, truncated to `x.len()`.
///
/// Accumulates tap by tap so the inner loop is a contiguous axpy; zero taps
/// are skipped, which keeps a unit impulse an exact identity.
pub fn convolve_truncated(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (lag, &tap) in h.iter().enumerate().take(x.len()) {
        if tap == 0.0 {
            continue;
        }
        for (out, s) in y[lag..].iter_mut().zip(x) {
            *out += tap * s;
        }
    }
    y
}
