use ndarray::{Array2, Axis};

use super::config::FeatureConfig;
use super::mel::{dct_matrix, mel_filterbank};
use super::stft::Stft;
use crate::audio_io::Waveform;
use crate::{Error, Result};

/// frames x coefficients feature matrix tagged with the config that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
    fingerprint: String,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>, fingerprint: impl Into<String>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFault { block: "features".into() });
        }
        Ok(Self {
            data,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn n_frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_coeffs(&self) -> usize {
        self.data.ncols()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

/// MFCC pipeline with the filterbank, DCT and FFT plan built once.
pub struct MfccExtractor {
    config: FeatureConfig,
    stft: Stft,
    filterbank_t: Array2<f64>,
    dct_t: Array2<f64>,
    fingerprint: String,
}

impl std::fmt::Debug for MfccExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfccExtractor").field("config", self.config()).finish_non_exhaustive()
    }
}

impl MfccExtractor {
    pub fn new(config: FeatureConfig) -> Result<Self> {
        let stft = Stft::new(&config)?;
        let filterbank_t = mel_filterbank(&config).reversed_axes();
        let dct_t = dct_matrix(config.n_mfcc, config.n_mels).reversed_axes();
        let fingerprint = config.fingerprint();
        Ok(Self {
            config,
            stft,
            filterbank_t,
            dct_t,
            fingerprint,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    /// Log mel energies, frames x n_mels.
    pub fn log_mel(&self, x: &Waveform) -> Result<Array2<f64>> {
        if x.sample_rate() != self.config.sample_rate {
            return Err(Error::Validation(format!(
                "waveform at {} Hz, features configured for {} Hz",
                x.sample_rate(),
                self.config.sample_rate
            )));
        }
        let power = self.stft.process(x)?.mapv(|c| c.norm_sqr());
        let floor = self.config.log_floor;
        Ok(power.dot(&self.filterbank_t).mapv(|e| e.max(floor).ln()))
    }

    pub fn mfcc(&self, x: &Waveform) -> Result<FeatureMatrix> {
        let mut coeffs = self.log_mel(x)?.dot(&self.dct_t);
        if self.config.cepstral_mean_norm {
            let mean = coeffs.mean_axis(Axis(0)).expect("at least one frame");
            coeffs -= &mean;
        }
        FeatureMatrix::new(coeffs, self.fingerprint.clone())
    }
}
