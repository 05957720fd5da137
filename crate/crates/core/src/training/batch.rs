use ndarray::{s, Array2, Array3, ArrayView2};

use crate::{Error, Result};

/// Right-padded minibatch of feature matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// `batch x max_frames x coefficients`, zero beyond each length.
    pub features: Array3<f32>,
    pub lengths: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn from_examples(examples: Vec<(Array2<f32>, usize)>) -> Result<Self> {
        let first = examples.first().ok_or_else(|| Error::EmptyInput("empty batch".into()))?;
        let coeffs = first.0.ncols();
        let max_frames = examples.iter().map(|(f, _)| f.nrows()).max().unwrap_or(0);
        let mut features = Array3::zeros((examples.len(), max_frames, coeffs));
        let mut lengths = Vec::with_capacity(examples.len());
        let mut labels = Vec::with_capacity(examples.len());
        for (i, (f, label)) in examples.into_iter().enumerate() {
            if f.ncols() != coeffs {
                return Err(Error::Validation(format!(
                    "example {i} has {} coefficients, expected {coeffs}",
                    f.ncols()
                )));
            }
            features.slice_mut(s![i, ..f.nrows(), ..]).assign(&f);
            lengths.push(f.nrows());
            labels.push(label);
        }
        Ok(Self { features, lengths, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Example `i` cut to its true length.
    pub fn example(&self, i: usize) -> ArrayView2<'_, f32> {
        self.features.slice(s![i, ..self.lengths[i], ..])
    }

    pub fn validate(&self, n_classes: usize) -> Result<()> {
        let frames = self.features.dim().1;
        if self.lengths.len() != self.labels.len() || self.features.dim().0 != self.labels.len() {
            return Err(Error::Validation("batch fields disagree on the batch size".into()));
        }
        if let Some(l) = self.lengths.iter().find(|&&l| l > frames || l == 0) {
            return Err(Error::Validation(format!("length {l} outside 1..={frames}")));
        }
        if let Some(y) = self.labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::Index(format!("label {y} out of range for {n_classes} classes")));
        }
        Ok(())
    }
}
