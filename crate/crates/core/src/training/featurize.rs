use std::sync::Arc;

use ndarray::Array2;

use crate::audio_io::{read_wav, ManifestEntry, Waveform};
use crate::augment::Augmenter;
use crate::features::{apply_freq_augment, FeatureConfig, FeatureMatrix, MaskSpec, MfccExtractor};
use crate::rng::StreamRng;
use crate::Result;

/// Audio loading plus the clean and augmented feature paths.
#[derive(Debug)]
pub struct Featurizer {
    extractor: MfccExtractor,
    augmenter: Option<Arc<Augmenter>>,
    masks: MaskSpec,
}

impl Featurizer {
    /// Without an augmenter, the augmented path equals the clean path.
    pub fn new(config: FeatureConfig, augmenter: Option<Arc<Augmenter>>, masks: MaskSpec) -> Result<Self> {
        masks.validate(config.n_mfcc)?;
        Ok(Self { extractor: MfccExtractor::new(config)?, augmenter, masks })
    }

    pub fn config(&self) -> &FeatureConfig {
        self.extractor.config()
    }

    pub fn augmenter(&self) -> Option<&Arc<Augmenter>> {
        self.augmenter.as_ref()
    }

    pub fn load(&self, entry: &ManifestEntry) -> Result<Waveform> {
        let wav = read_wav(&entry.path)?;
        wav.ensure_rate(self.config().sample_rate)?;
        Ok(wav)
    }

    pub fn clean(&self, wav: &Waveform) -> Result<Array2<f32>> {
        Ok(to_f32(self.extractor.mfcc(wav)?))
    }

    /// Time-domain operators, MFCC, then masking, all drawing from `rng`.
    pub fn augmented(&self, wav: &Waveform, rng: &mut StreamRng) -> Result<Array2<f32>> {
        let Some(augmenter) = &self.augmenter else {
            return self.clean(wav);
        };
        let wav = augmenter.apply_time_augment(wav, rng);
        let mut feat = self.extractor.mfcc(&wav)?;
        apply_freq_augment(&mut feat, &self.masks, augmenter.policy(), rng)?;
        Ok(to_f32(feat))
    }
}

fn to_f32(feat: FeatureMatrix) -> Array2<f32> {
    feat.into_data().mapv(|v| v as f32)
}
