//! Single-direction GRU with the reset gate applied to the projected state:
//!
//! ```text
//! r = σ(W_ir x + b_ir + W_hr h + b_hr)
//! z = σ(W_iz x + b_iz + W_hz h + b_hz)
//! n = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ```

use ndarray::{s, Array1, Array2, Axis};

use super::ops::{linear, linear_backward, sigmoid};
use super::params::GruDirection;
use super::scalar::Scalar;

struct Step<T> {
    prev: Array1<T>,
    reset: Array1<T>,
    update: Array1<T>,
    candidate: Array1<T>,
    /// `W_hn h + b_hn`, needed for the reset-gate gradient.
    hidden_candidate: Array1<T>,
}

pub(crate) struct GruCache<T> {
    input: Array2<T>,
    reverse: bool,
    steps: Vec<Step<T>>,
}

/// Runs over `x` (`frames x d`) forwards, or backwards when `reverse`, and
/// returns the state after the last consumed frame.
pub(crate) fn gru_forward<T: Scalar>(x: &Array2<T>, cell: &GruDirection<T>, reverse: bool) -> (Array1<T>, GruCache<T>) {
    let width = cell.hidden.weight.nrows();
    let projected = linear(&x.view(), &cell.input);
    let mut h = Array1::zeros(width);
    let mut steps = Vec::with_capacity(x.nrows());
    let order: Vec<usize> = if reverse { (0..x.nrows()).rev().collect() } else { (0..x.nrows()).collect() };
    for t in order {
        let gi = projected.row(t);
        let mut gh = h.dot(&cell.hidden.weight);
        gh += &cell.hidden.bias;
        let reset = Array1::from_shape_fn(width, |c| sigmoid(gi[c] + gh[c]));
        let update = Array1::from_shape_fn(width, |c| sigmoid(gi[width + c] + gh[width + c]));
        let hidden_candidate = gh.slice(s![2 * width..]).to_owned();
        let candidate = Array1::from_shape_fn(width, |c| (gi[2 * width + c] + reset[c] * hidden_candidate[c]).tanh());
        let next = Array1::from_shape_fn(width, |c| (T::one() - update[c]) * candidate[c] + update[c] * h[c]);
        steps.push(Step { prev: h, reset, update, candidate, hidden_candidate });
        h = next;
    }
    (h, GruCache { input: x.clone(), reverse, steps })
}

/// Backward from the gradient of the final state; returns the input gradient.
pub(crate) fn gru_backward<T: Scalar>(
    cache: &GruCache<T>,
    cell: &GruDirection<T>,
    d_final: &Array1<T>,
    grad: &mut GruDirection<T>,
) -> Array2<T> {
    let width = d_final.len();
    let frames = cache.input.nrows();
    let mut d_projected = Array2::zeros((frames, 3 * width));
    let mut dh = d_final.clone();
    for (k, step) in cache.steps.iter().enumerate().rev() {
        let t = if cache.reverse { frames - 1 - k } else { k };
        let mut dgi = d_projected.row_mut(t);
        let mut dgh = Array1::zeros(3 * width);
        let mut dprev = Array1::zeros(width);
        for c in 0..width {
            let (r, z, n) = (step.reset[c], step.update[c], step.candidate[c]);
            let dn = dh[c] * (T::one() - z);
            let dz = dh[c] * (step.prev[c] - n);
            dprev[c] = dh[c] * z;
            let dn_pre = dn * (T::one() - n * n);
            let dr = dn_pre * step.hidden_candidate[c];
            let dz_pre = dz * z * (T::one() - z);
            let dr_pre = dr * r * (T::one() - r);
            dgi[c] = dr_pre;
            dgi[width + c] = dz_pre;
            dgi[2 * width + c] = dn_pre;
            dgh[c] = dr_pre;
            dgh[width + c] = dz_pre;
            dgh[2 * width + c] = dn_pre * r;
        }
        let prev = step.prev.view().insert_axis(Axis(1));
        grad.hidden.weight += &prev.dot(&dgh.view().insert_axis(Axis(0)));
        grad.hidden.bias += &dgh;
        dprev += &cell.hidden.weight.dot(&dgh);
        dh = dprev;
    }
    linear_backward(&cache.input.view(), &cell.input, &d_projected, &mut grad.input)
}
