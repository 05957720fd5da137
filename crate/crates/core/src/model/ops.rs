//! Row-wise building blocks with hand-written backward passes.
//!
//! Activations are `frames x channels`. Backward functions add parameter
//! gradients into a caller-owned accumulator and return the input gradient.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use super::params::{LayerNorm, Linear};
use super::scalar::Scalar;
use crate::rng::StreamRng;
use crate::{Error, Result};

pub(crate) const LAYER_NORM_EPS: f64 = 1e-5;

/// Whether a forward pass is allowed to be stochastic.
pub enum Mode<'a> {
    Eval,
    /// Dropout masks are drawn from the given stream.
    Train(&'a mut StreamRng),
}

impl Mode<'_> {
    pub fn is_train(&self) -> bool {
        matches!(self, Mode::Train(_))
    }
}

pub(crate) fn linear<T: Scalar>(x: &ArrayView2<T>, layer: &Linear<T>) -> Array2<T> {
    let mut y = x.dot(&layer.weight);
    y += &layer.bias;
    y
}

pub(crate) fn linear_backward<T: Scalar>(
    x: &ArrayView2<T>,
    layer: &Linear<T>,
    dy: &Array2<T>,
    grad: &mut Linear<T>,
) -> Array2<T> {
    grad.weight += &x.t().dot(dy);
    grad.bias += &dy.sum_axis(Axis(0));
    dy.dot(&layer.weight.t())
}

pub(crate) struct NormCache<T> {
    normalized: Array2<T>,
    inv_std: Array1<T>,
}

pub(crate) fn layer_norm<T: Scalar>(x: &Array2<T>, norm: &LayerNorm<T>) -> (Array2<T>, NormCache<T>) {
    let width = T::of(x.ncols() as f64);
    let eps = T::of(LAYER_NORM_EPS);
    let mut normalized = x.clone();
    let mut inv_std = Array1::zeros(x.nrows());
    for (mut row, s) in normalized.rows_mut().into_iter().zip(inv_std.iter_mut()) {
        let mean = row.sum() / width;
        row.mapv_inplace(|v| v - mean);
        let var = row.iter().map(|&v| v * v).sum::<T>() / width;
        *s = T::one() / (var + eps).sqrt();
        let scale = *s;
        row.mapv_inplace(|v| v * scale);
    }
    let mut y = &normalized * &norm.gain;
    y += &norm.offset;
    (y, NormCache { normalized, inv_std })
}

pub(crate) fn layer_norm_backward<T: Scalar>(
    cache: &NormCache<T>,
    norm: &LayerNorm<T>,
    dy: &Array2<T>,
    grad: &mut LayerNorm<T>,
) -> Array2<T> {
    grad.gain += &(dy * &cache.normalized).sum_axis(Axis(0));
    grad.offset += &dy.sum_axis(Axis(0));
    let width = T::of(dy.ncols() as f64);
    let mut dx = dy * &norm.gain;
    for ((mut row, xhat), &s) in dx.rows_mut().into_iter().zip(cache.normalized.rows()).zip(&cache.inv_std) {
        let mean_d = row.sum() / width;
        let mean_dx = row.iter().zip(xhat).map(|(&d, &h)| d * h).sum::<T>() / width;
        Zip::from(&mut row).and(&xhat).for_each(|d, &h| *d = s * (*d - mean_d - h * mean_dx));
    }
    dx
}

pub(crate) fn sigmoid<T: Scalar>(v: T) -> T {
    T::one() / (T::one() + (-v).exp())
}

pub(crate) fn swish<T: Scalar>(x: &Array2<T>) -> Array2<T> {
    x.mapv(|v| v * sigmoid(v))
}

pub(crate) fn swish_backward<T: Scalar>(x: &Array2<T>, dy: &Array2<T>) -> Array2<T> {
    let mut dx = dy.clone();
    Zip::from(&mut dx).and(x).for_each(|d, &v| {
        let s = sigmoid(v);
        *d *= s + v * s * (T::one() - s);
    });
    dx
}

/// Inverted dropout. Returns `None` (identity) in eval mode or when `p == 0`.
pub(crate) fn dropout_mask<T: Scalar>(shape: (usize, usize), p: f64, mode: &mut Mode<'_>) -> Option<Array2<T>> {
    match mode {
        Mode::Train(rng) if p > 0.0 => {
            let keep = T::of(1.0 / (1.0 - p));
            Some(Array2::from_shape_simple_fn(shape, || {
                if rng.random::<f64>() < p {
                    T::zero()
                } else {
                    keep
                }
            }))
        }
        _ => None,
    }
}

pub(crate) fn apply_mask<T: Scalar>(x: Array2<T>, mask: &Option<Array2<T>>) -> Array2<T> {
    match mask {
        Some(m) => x * m,
        None => x,
    }
}

/// Row-wise softmax in place.
pub(crate) fn softmax_rows<T: Scalar>(x: &mut Array2<T>) {
    for mut row in x.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
}

/// Backward of row-wise softmax given its output `y`.
pub(crate) fn softmax_rows_backward<T: Scalar>(y: &Array2<T>, dy: &Array2<T>) -> Array2<T> {
    let mut dx = dy * y;
    for (mut row, yr) in dx.rows_mut().into_iter().zip(y.rows()) {
        let dot = row.sum();
        Zip::from(&mut row).and(&yr).for_each(|d, &p| *d -= p * dot);
    }
    dx
}

pub(crate) fn log_softmax<T: Scalar>(logits: &Array1<T>) -> Array1<T> {
    let max = logits.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let lse = max + logits.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
    logits.mapv(|v| v - lse)
}

pub(crate) fn check_finite<T: Scalar>(x: &Array2<T>, block: impl FnOnce() -> String) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericFault { block: block() })
    }
}

/// Gated linear unit over channel halves: `a * sigmoid(b)` for `[a | b]`.
pub(crate) fn glu<T: Scalar>(x: &Array2<T>) -> Array2<T> {
    let d = x.ncols() / 2;
    let mut y = x.slice(s![.., ..d]).to_owned();
    Zip::from(&mut y).and(x.slice(s![.., d..])).for_each(|a, &b| *a *= sigmoid(b));
    y
}

pub(crate) fn glu_backward<T: Scalar>(x: &Array2<T>, dy: &Array2<T>) -> Array2<T> {
    let d = x.ncols() / 2;
    let mut dx = Array2::zeros(x.raw_dim());
    for t in 0..x.nrows() {
        for c in 0..d {
            let a = x[[t, c]];
            let g = sigmoid(x[[t, c + d]]);
            dx[[t, c]] = dy[[t, c]] * g;
            dx[[t, c + d]] = dy[[t, c]] * a * g * (T::one() - g);
        }
    }
    dx
}

/// Same-padded depthwise convolution along time. `weight` is `kernel x channels`.
pub(crate) fn depthwise<T: Scalar>(x: &Array2<T>, weight: &Array2<T>, bias: &Array1<T>) -> Array2<T> {
    let frames = x.nrows() as isize;
    let half = (weight.nrows() / 2) as isize;
    let mut y = Array2::zeros(x.raw_dim());
    for mut row in y.rows_mut() {
        row.assign(bias);
    }
    for (j, taps) in weight.rows().into_iter().enumerate() {
        let shift = j as isize - half;
        // y[t] += w[j] * x[t + shift] for every t with t + shift in range
        let lo = (-shift).max(0);
        let hi = (frames - shift).min(frames);
        if lo >= hi {
            continue;
        }
        let mut out = y.slice_mut(s![lo..hi, ..]);
        let src = x.slice(s![lo + shift..hi + shift, ..]);
        Zip::from(out.rows_mut()).and(src.rows()).for_each(|mut o, i| {
            Zip::from(&mut o).and(&i).and(&taps).for_each(|o, &v, &w| *o += w * v);
        });
    }
    y
}

/// Returns `dx` and accumulates weight and bias gradients.
pub(crate) fn depthwise_backward<T: Scalar>(
    x: &Array2<T>,
    weight: &Array2<T>,
    dy: &Array2<T>,
    grad_weight: &mut Array2<T>,
    grad_bias: &mut Array1<T>,
) -> Array2<T> {
    let frames = x.nrows() as isize;
    let half = (weight.nrows() / 2) as isize;
    *grad_bias += &dy.sum_axis(Axis(0));
    let mut dx = Array2::zeros(x.raw_dim());
    for (j, taps) in weight.rows().into_iter().enumerate() {
        let shift = j as isize - half;
        let lo = (-shift).max(0);
        let hi = (frames - shift).min(frames);
        if lo >= hi {
            continue;
        }
        let d_out = dy.slice(s![lo..hi, ..]);
        let src = x.slice(s![lo + shift..hi + shift, ..]);
        let mut gw = grad_weight.row_mut(j);
        gw += &(&d_out * &src).sum_axis(Axis(0));
        let mut dst = dx.slice_mut(s![lo + shift..hi + shift, ..]);
        dst += &(&d_out * &taps);
    }
    dx
}

/// Absolute sinusoidal position encodings, `frames x width`.
pub(crate) fn sinusoidal_encoding<T: Scalar>(frames: usize, width: usize) -> Array2<T> {
    Array2::from_shape_fn((frames, width), |(t, c)| {
        let pair = (c / 2) as f64;
        let angle = t as f64 / 10000f64.powf(2.0 * pair / width as f64);
        T::of(if c % 2 == 0 { angle.sin() } else { angle.cos() })
    })
}
