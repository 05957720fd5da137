use ndarray::ArrayView2;

use crate::model::Scalar;
use crate::{Error, Result};

/// Mean negative log-likelihood of `labels` under row-wise log-probabilities.
pub fn nll_loss<T: Scalar>(log_probs: ArrayView2<T>, labels: &[usize]) -> Result<f64> {
    if log_probs.nrows() != labels.len() {
        return Err(Error::Index(format!("{} rows for {} labels", log_probs.nrows(), labels.len())));
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput("empty batch".into()));
    }
    let mut total = 0.0;
    for (row, &label) in log_probs.rows().into_iter().zip(labels) {
        let lp = row.get(label).ok_or_else(|| {
            Error::Index(format!("label {label} out of range for {} classes", row.len()))
        })?;
        total -= lp.f64();
    }
    Ok(total / labels.len() as f64)
}

/// Linearly decayed learning rate `lr0 * (1 - e / E)` for epoch `e` of `E`.
pub fn lr_at(epoch: usize, total: usize, lr0: f64) -> Result<f64> {
    if epoch >= total {
        return Err(Error::ScheduleDomain { epoch, total });
    }
    Ok(lr0 * (1.0 - epoch as f64 / total as f64))
}
