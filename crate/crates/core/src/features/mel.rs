use std::f64::consts::PI;

use ndarray::Array2;

use super::config::FeatureConfig;

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// The `n_mels + 2` triangle corner frequencies in Hz, equally spaced in mel.
pub(crate) fn mel_points(config: &FeatureConfig) -> Vec<f64> {
    let lo = hz_to_mel(config.fmin);
    let hi = hz_to_mel(config.fmax);
    let n = config.n_mels + 1;
    (0..=n)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / n as f64))
        .collect()
}

/// n_mels x (fft_size / 2 + 1) triangular filters with unit peaks,
/// evaluated at the exact bin frequencies.
pub fn mel_filterbank(config: &FeatureConfig) -> Array2<f64> {
    let points = mel_points(config);
    let bin_hz = f64::from(config.sample_rate) / config.fft_size as f64;
    Array2::from_shape_fn((config.n_mels, config.n_bins()), |(m, k)| {
        let f = k as f64 * bin_hz;
        let (left, center, right) = (points[m], points[m + 1], points[m + 2]);
        let rising = (f - left) / (center - left);
        let falling = (right - f) / (right - center);
        rising.min(falling).max(0.0)
    })
}

/// Orthonormal DCT-II, keeping the first `n_out` of `n_in` basis rows.
pub fn dct_matrix(n_out: usize, n_in: usize) -> Array2<f64> {
    let n = n_in as f64;
    Array2::from_shape_fn((n_out, n_in), |(k, i)| {
        let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
        scale * (PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * n)).cos()
    })
}
