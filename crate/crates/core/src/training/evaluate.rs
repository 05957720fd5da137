use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::featurize::Featurizer;
use super::metrics::{accuracy, argmax, ConfusionMatrix};
use crate::audio_io::{ManifestEntry, Waveform};
use crate::features::{FeatureConfig, MaskSpec, MfccExtractor};
use crate::model::{predict_log_probs, Checkpoint, Parameters};
use crate::{Error, Result};

/// Eval-mode predictions for precomputed feature matrices, in input order.
pub fn predict_features(params: &Parameters<f32>, features: &[Array2<f32>]) -> Result<Vec<usize>> {
    features
        .par_iter()
        .map(|f| Ok(argmax(predict_log_probs(params, f.view())?.view())))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub predictions: Vec<usize>,
    pub labels: Vec<usize>,
}

fn check_fingerprint(checkpoint: &Checkpoint, config: &FeatureConfig) -> Result<()> {
    let expected = config.fingerprint();
    if checkpoint.meta.feature_fingerprint != expected {
        return Err(Error::Config(format!(
            "checkpoint features `{}` differ from the run's `{expected}`",
            checkpoint.meta.feature_fingerprint
        )));
    }
    Ok(())
}

/// Accuracy and confusion matrix of `checkpoint` on `entries`, without any
/// augmentation.
pub fn evaluate(entries: &[ManifestEntry], checkpoint: &Checkpoint, config: &FeatureConfig) -> Result<EvalReport> {
    check_fingerprint(checkpoint, config)?;
    if entries.is_empty() {
        return Err(Error::Domain("nothing to evaluate".into()));
    }
    let featurizer = Featurizer::new(config.clone(), None, MaskSpec::default())?;
    let labels_map = &checkpoint.meta.labels;
    let (features, labels): (Vec<Array2<f32>>, Vec<usize>) = entries
        .par_iter()
        .map(|e| Ok((featurizer.clean(&featurizer.load(e)?)?, labels_map.index(&e.label)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let predictions = predict_features(&checkpoint.params, &features)?;
    Ok(EvalReport {
        accuracy: accuracy(&predictions, &labels)?,
        confusion: ConfusionMatrix::from_pairs(labels_map.len(), &labels, &predictions)?,
        predictions,
        labels,
    })
}

/// A loaded checkpoint ready to label waveforms.
#[derive(Debug)]
pub struct Classifier {
    checkpoint: Checkpoint,
    extractor: MfccExtractor,
}

impl Classifier {
    pub fn new(checkpoint: Checkpoint) -> Result<Self> {
        let extractor = MfccExtractor::new(checkpoint.meta.feature_config.clone())?;
        check_fingerprint(&checkpoint, extractor.config())?;
        Ok(Self { checkpoint, extractor })
    }

    pub fn checkpoint(&self) -> &Checkpoint {
        &self.checkpoint
    }

    /// Class probabilities in label-map order.
    pub fn probabilities(&self, wav: &Waveform) -> Result<Array1<f64>> {
        wav.ensure_rate(self.extractor.config().sample_rate)?;
        let features = self.extractor.mfcc(wav)?.into_data().mapv(|v| v as f32);
        let log_probs = predict_log_probs(&self.checkpoint.params, features.view())?;
        Ok(log_probs.mapv(|v| f64::from(v).exp()))
    }

    /// The `k` most probable `(class index, probability)` pairs, best first.
    pub fn top_k(&self, wav: &Waveform, k: usize) -> Result<Vec<(usize, f64)>> {
        let probs = self.probabilities(wav)?;
        let mut ranked: Vec<(usize, f64)> = probs.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        Ok(ranked)
    }
}
