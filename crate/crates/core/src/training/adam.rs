use ndarray::Zip;

use crate::model::{Parameters, Scalar};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub first: Parameters<T>,
    pub second: Parameters<T>,
    pub step: u64,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(params: &Parameters<T>) -> Self {
        Self { first: params.zeros_like(), second: params.zeros_like(), step: 0 }
    }
}

/// One bias-corrected Adam update. Gradients are checked before anything is
/// modified, so a fault leaves parameters and state untouched.
pub fn adam_step<T: Scalar>(
    params: &mut Parameters<T>,
    grads: &Parameters<T>,
    state: &mut OptimizerState<T>,
    lr: f64,
    config: &AdamConfig,
) -> Result<()> {
    params.check_shapes(grads)?;
    params.check_shapes(&state.first)?;
    if let Some(name) = grads.first_non_finite() {
        return Err(Error::NumericFault { block: format!("gradient of {name}") });
    }
    state.step += 1;
    let t = state.step as i32;
    let b1 = T::of(config.beta1);
    let b2 = T::of(config.beta2);
    let c1 = T::of(1.0 - config.beta1);
    let c2 = T::of(1.0 - config.beta2);
    let first_correction = T::of(1.0 / (1.0 - config.beta1.powi(t)));
    let second_correction = T::of(1.0 / (1.0 - config.beta2.powi(t)));
    let lr = T::of(lr);
    let eps = T::of(config.eps);

    let g = grads.named_tensors();
    let m = state.first.named_tensors_mut();
    let v = state.second.named_tensors_mut();
    for ((((_, mut p), (_, g)), (_, mut m)), (_, mut v)) in params.named_tensors_mut().into_iter().zip(g).zip(m).zip(v) {
        Zip::from(&mut p).and(&g).and(&mut m).and(&mut v).for_each(|p, &g, m, v| {
            *m = b1 * *m + c1 * g;
            *v = b2 * *v + c2 * g * g;
            let m_hat = *m * first_correction;
            let v_hat = *v * second_correction;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        });
    }
    Ok(())
}
