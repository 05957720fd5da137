use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub n_mfcc: usize,
    pub window_ms: f64,
    pub hop_ms: f64,
    pub n_mels: usize,
    pub fft_size: usize,
    pub sample_rate: u32,
    pub fmin: f64,
    pub fmax: f64,
    pub log_floor: f64,
    /// Subtract the per-coefficient mean over frames.
    #[serde(default)]
    pub cepstral_mean_norm: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            n_mfcc: 40,
            window_ms: 25.0,
            hop_ms: 10.0,
            n_mels: 80,
            fft_size: 512,
            sample_rate: 16_000,
            fmin: 0.0,
            fmax: 8000.0,
            log_floor: 1e-10,
            cepstral_mean_norm: false,
        }
    }
}

impl FeatureConfig {
    fn ms_to_samples(&self, ms: f64) -> usize {
        (ms * f64::from(self.sample_rate) / 1000.0).round() as usize
    }

    pub fn window_samples(&self) -> usize {
        self.ms_to_samples(self.window_ms)
    }

    pub fn hop_samples(&self) -> usize {
        self.ms_to_samples(self.hop_ms)
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frames produced for `len` samples (non-centered, no padding).
    pub fn n_frames(&self, len: usize) -> usize {
        let win = self.window_samples();
        if len < win {
            0
        } else {
            1 + (len - win) / self.hop_samples()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let win = self.window_samples();
        let checks = [
            (self.sample_rate > 0, "sample rate must be positive"),
            (win > 0 && self.hop_samples() > 0, "window and hop must be at least one sample"),
            (self.fft_size >= win, "fft_size must cover the window"),
            (self.n_mfcc >= 1 && self.n_mfcc <= self.n_mels, "need 1 <= n_mfcc <= n_mels"),
            (self.fmin >= 0.0 && self.fmin < self.fmax, "need 0 <= fmin < fmax"),
            (self.fmax <= f64::from(self.sample_rate) / 2.0, "fmax above Nyquist"),
            (self.log_floor > 0.0, "log floor must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config(format!("feature config: {msg}"))),
            None => Ok(()),
        }
    }

    /// Identifies every setting that changes the features, including the
    /// fixed choices (Hann window, HTK mel, orthonormal DCT-II).
    pub fn fingerprint(&self) -> String {
        format!(
            "mfcc-v1;n_mfcc={};win_ms={};hop_ms={};n_mels={};fft={};sr={};fmin={};fmax={};floor={:e};cmn={};window=hann-periodic;mel=htk;dct=ii-ortho;power=2",
            self.n_mfcc,
            self.window_ms,
            self.hop_ms,
            self.n_mels,
            self.fft_size,
            self.sample_rate,
            self.fmin,
            self.fmax,
            self.log_floor,
            u8::from(self.cepstral_mean_norm),
        )
    }
}
