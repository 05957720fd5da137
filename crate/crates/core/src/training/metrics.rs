use ndarray::{Array2, ArrayView1};
use crate::model::Scalar;
use crate::{Error, Result};

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Scalar>(scores: ArrayView1<T>) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = i;
        }
    }
    best
}

/// Percentage of predictions equal to their label.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Domain("accuracy of an empty set".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Domain(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64 * 100.0)
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Array2<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self { counts: Array2::zeros((n_classes, n_classes)) }
    }

    pub fn from_pairs(n_classes: usize, labels: &[usize], predictions: &[usize]) -> Result<Self> {
        let mut m = Self::new(n_classes);
        for (&l, &p) in labels.iter().zip(predictions) {
            if l >= n_classes || p >= n_classes {
                return Err(Error::Index(format!("class index out of range for {n_classes} classes")));
            }
            m.counts[[l, p]] += 1;
        }
        Ok(m)
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    /// CSV with a header row of predicted labels and one row per true label.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("true\\predicted");
        for l in labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in labels.iter().zip(self.counts.rows()) {
            out.push_str(l);
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}
