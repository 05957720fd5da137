use ndarray::s;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mfcc::FeatureMatrix;
use crate::augment::{select_ops, AugmentationPolicy, FreqOp};
use crate::{Error, Result};

/// Mask widths and counts for the two masking operators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSpec {
    pub max_time_mask_frames: usize,
    pub max_freq_mask_bins: usize,
    pub n_time_masks: usize,
    pub n_freq_masks: usize,
}

impl Default for MaskSpec {
    fn default() -> Self {
        Self {
            max_time_mask_frames: 20,
            max_freq_mask_bins: 8,
            n_time_masks: 1,
            n_freq_masks: 1,
        }
    }
}

impl MaskSpec {
    pub fn validate(&self, n_coeffs: usize) -> Result<()> {
        if self.max_freq_mask_bins > n_coeffs {
            return Err(Error::Config(format!(
                "frequency masks up to {} bins exceed {n_coeffs} coefficients",
                self.max_freq_mask_bins
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskAxis {
    Time,
    Frequency,
}

/// Zeroes `width` consecutive frames or coefficients starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mask {
    pub axis: MaskAxis,
    pub start: usize,
    pub width: usize,
}

impl Mask {
    fn sample<R: Rng + ?Sized>(axis: MaskAxis, extent: usize, max_width: usize, rng: &mut R) -> Self {
        let width = rng.random_range(0..=max_width.min(extent));
        let start = rng.random_range(0..=extent - width);
        Self { axis, start, width }
    }
}

pub fn apply_mask(feat: &mut FeatureMatrix, mask: &Mask) -> Result<()> {
    let extent = match mask.axis {
        MaskAxis::Time => feat.n_frames(),
        MaskAxis::Frequency => feat.n_coeffs(),
    };
    if mask.start + mask.width > extent {
        return Err(Error::Validation(format!("{mask:?} exceeds axis length {extent}")));
    }
    let range = mask.start..mask.start + mask.width;
    match mask.axis {
        MaskAxis::Time => feat.data_mut().slice_mut(s![range, ..]).fill(0.0),
        MaskAxis::Frequency => feat.data_mut().slice_mut(s![.., range]).fill(0.0),
    }
    Ok(())
}

/// Selects masking operators at rate gamma and applies them in shuffled order.
/// Returns the masks that were applied.
pub fn apply_freq_augment<R: Rng + ?Sized>(
    feat: &mut FeatureMatrix,
    spec: &MaskSpec,
    policy: &AugmentationPolicy,
    rng: &mut R,
) -> Result<Vec<Mask>> {
    spec.validate(feat.n_coeffs())?;
    let mut applied = Vec::new();
    for op in select_ops(&policy.freq_ops, policy.gamma_rate, rng) {
        let (axis, count, extent, max_width) = match op {
            FreqOp::TimeMask => (MaskAxis::Time, spec.n_time_masks, feat.n_frames(), spec.max_time_mask_frames),
            FreqOp::FreqMask => (MaskAxis::Frequency, spec.n_freq_masks, feat.n_coeffs(), spec.max_freq_mask_bins),
        };
        for _ in 0..count {
            let mask = Mask::sample(axis, extent, max_width, rng);
            apply_mask(feat, &mask)?;
            applied.push(mask);
        }
    }
    Ok(applied)
}
