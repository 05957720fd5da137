use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::config::FeatureConfig;
use crate::audio_io::Waveform;
use crate::{Error, Result};

/// Periodic Hann window of `len` points.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
        .collect()
}

/// Short-time Fourier transform with a Hann window, zero-padded to the FFT size.
pub struct Stft {
    window: Vec<f64>,
    hop: usize,
    fft_size: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(config: &FeatureConfig) -> Result<Self> {
        config.validate()?;
        let fft = FftPlanner::new().plan_fft_forward(config.fft_size);
        Ok(Self {
            window: hann_window(config.window_samples()),
            hop: config.hop_samples(),
            fft_size: config.fft_size,
            fft,
        })
    }

    /// frames x (fft_size / 2 + 1) complex spectrum.
    pub fn process(&self, x: &Waveform) -> Result<Array2<Complex64>> {
        let win = self.window.len();
        if x.len() < win {
            return Err(Error::TooShort { len: x.len(), min: win });
        }
        let n_frames = 1 + (x.len() - win) / self.hop;
        let n_bins = self.fft_size / 2 + 1;
        let mut out = Array2::zeros((n_frames, n_bins));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_size];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for (t, mut row) in out.rows_mut().into_iter().enumerate() {
            let frame = &x.samples()[t * self.hop..t * self.hop + win];
            for (slot, (s, w)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
                *slot = Complex64::new(s * w, 0.0);
            }
            buf[win..].fill(Complex64::new(0.0, 0.0));
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            row.iter_mut().zip(&buf).for_each(|(o, b)| *o = *b);
        }
        Ok(out)
    }
}
