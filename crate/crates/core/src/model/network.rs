//! Whole-network forward and backward passes for a single utterance.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::config::ModelConfig;
use super::conformer::{layer_backward, layer_forward, LayerCache};
use super::gru::{gru_backward, gru_forward, GruCache};
use super::ops::{apply_mask, check_finite, dropout_mask, linear, linear_backward, log_softmax, sinusoidal_encoding, Mode};
use super::params::{ConformerLayer, Parameters};
use super::scalar::Scalar;
use crate::{Error, Result};

/// Everything the backward pass needs from one forward pass.
pub struct ForwardTrace<T> {
    config: ModelConfig,
    n_scalars: usize,
    train: bool,
    features: Array2<T>,
    prenet_mask: Option<Array2<T>>,
    layers: Vec<LayerCache<T>>,
    gru_forward: GruCache<T>,
    gru_backward: GruCache<T>,
    aggregate: Array2<T>,
    post_pre_activation: Array2<T>,
    post: Array2<T>,
    log_probs: Array1<T>,
}

impl<T: Scalar> ForwardTrace<T> {
    /// Class log-probabilities.
    pub fn log_probs(&self) -> &Array1<T> {
        &self.log_probs
    }

    pub fn probabilities(&self) -> Array1<T> {
        self.log_probs.mapv(|v| v.exp())
    }

    pub fn is_train(&self) -> bool {
        self.train
    }

    pub fn n_frames(&self) -> usize {
        self.features.nrows()
    }

    /// Attention weights of every head in `layer`, each `frames x frames`.
    pub fn attention_weights(&self, layer: usize) -> &[Array2<T>] {
        self.layers[layer].attention.weights()
    }
}

/// Forward pass over `features` (`frames x n_features`).
pub fn model_forward<T: Scalar>(
    params: &Parameters<T>,
    features: ArrayView2<T>,
    mut mode: Mode<'_>,
) -> Result<ForwardTrace<T>> {
    let config = &params.config;
    if features.nrows() == 0 {
        return Err(Error::EmptyInput("feature matrix has zero frames".into()));
    }
    if features.ncols() != config.n_features {
        return Err(Error::Validation(format!(
            "expected {} feature coefficients, got {}",
            config.n_features,
            features.ncols()
        )));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("feature matrix contains non-finite values".into()));
    }
    let p = config.dropout;
    let train = mode.is_train();

    let mut x = linear(&features, &params.prenet);
    if config.positional_encoding {
        x += &sinusoidal_encoding(x.nrows(), x.ncols());
    }
    let prenet_mask = dropout_mask(x.dim(), p, &mut mode);
    x = apply_mask(x, &prenet_mask);
    check_finite(&x, || "prenet".into())?;

    let mut layers = Vec::with_capacity(params.layers.len());
    for (i, layer) in params.layers.iter().enumerate() {
        let (y, cache) = layer_forward(&x, layer, config.n_heads, p, &mut mode, &format!("layers.{i}"))?;
        layers.push(cache);
        x = y;
    }

    let (h_fwd, gru_fwd) = gru_forward(&x, &params.gru_forward, false);
    let (h_bwd, gru_bwd) = gru_forward(&x, &params.gru_backward, true);
    let hidden = config.gru_hidden;
    let mut aggregate = Array2::zeros((1, 2 * hidden));
    aggregate.row_mut(0).slice_mut(ndarray::s![..hidden]).assign(&h_fwd);
    aggregate.row_mut(0).slice_mut(ndarray::s![hidden..]).assign(&h_bwd);
    check_finite(&aggregate, || "gru".into())?;

    let post_pre_activation = linear(&aggregate.view(), &params.postnet);
    let post = post_pre_activation.mapv(|v| v.max(T::zero()));
    check_finite(&post, || "postnet".into())?;
    let logits = linear(&post.view(), &params.classifier).index_axis_move(Axis(0), 0);
    let log_probs = log_softmax(&logits);
    if log_probs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFault { block: "classifier".into() });
    }

    Ok(ForwardTrace {
        config: config.clone(),
        n_scalars: params.num_scalars(),
        train,
        features: features.to_owned(),
        prenet_mask,
        layers,
        gru_forward: gru_fwd,
        gru_backward: gru_bwd,
        aggregate,
        post_pre_activation,
        post,
        log_probs,
    })
}

/// Eval-mode class log-probabilities.
pub fn predict_log_probs<T: Scalar>(params: &Parameters<T>, features: ArrayView2<T>) -> Result<Array1<T>> {
    Ok(model_forward(params, features, Mode::Eval)?.log_probs)
}

/// One conformer layer in isolation, e.g. for equivariance checks.
pub fn conformer_layer_forward<T: Scalar>(
    x: &Array2<T>,
    layer: &ConformerLayer<T>,
    config: &ModelConfig,
    mut mode: Mode<'_>,
) -> Result<Array2<T>> {
    Ok(layer_forward(x, layer, config.n_heads, config.dropout, &mut mode, "layer")?.0)
}

/// Gradients of `Σ_c upstream[c] · log_probs[c]` with respect to every parameter.
pub fn model_backward<T: Scalar>(
    params: &Parameters<T>,
    trace: &ForwardTrace<T>,
    upstream: &Array1<T>,
) -> Result<Parameters<T>> {
    let mut grads = params.zeros_like();
    backward_into(params, trace, upstream, &mut grads)?;
    Ok(grads)
}

/// As [`model_backward`], adding into an existing gradient accumulator.
pub fn backward_into<T: Scalar>(
    params: &Parameters<T>,
    trace: &ForwardTrace<T>,
    upstream: &Array1<T>,
    grads: &mut Parameters<T>,
) -> Result<()> {
    if !trace.train {
        return Err(Error::Consistency("backward needs a train-mode trace".into()));
    }
    if trace.config != params.config || trace.n_scalars != params.num_scalars() {
        return Err(Error::Consistency("trace was recorded with a different model".into()));
    }
    if grads.config != params.config {
        return Err(Error::Consistency("gradient accumulator has a different layout".into()));
    }
    if upstream.len() != params.config.n_classes {
        return Err(Error::Consistency(format!(
            "upstream gradient has {} entries for {} classes",
            upstream.len(),
            params.config.n_classes
        )));
    }

    let total = upstream.sum();
    let d_logits = Array1::from_shape_fn(upstream.len(), |c| upstream[c] - trace.log_probs[c].exp() * total)
        .insert_axis(Axis(0));
    let d_post = linear_backward(&trace.post.view(), &params.classifier, &d_logits, &mut grads.classifier);
    let mut d_post_pre = d_post;
    ndarray::Zip::from(&mut d_post_pre)
        .and(&trace.post_pre_activation)
        .for_each(|d, &v| if v <= T::zero() { *d = T::zero() });
    let d_aggregate =
        linear_backward(&trace.aggregate.view(), &params.postnet, &d_post_pre, &mut grads.postnet).index_axis_move(Axis(0), 0);

    let hidden = params.config.gru_hidden;
    let d_fwd = d_aggregate.slice(ndarray::s![..hidden]).to_owned();
    let d_bwd = d_aggregate.slice(ndarray::s![hidden..]).to_owned();
    let mut dx = gru_backward(&trace.gru_forward, &params.gru_forward, &d_fwd, &mut grads.gru_forward);
    dx += &gru_backward(&trace.gru_backward, &params.gru_backward, &d_bwd, &mut grads.gru_backward);

    for ((cache, layer), grad) in trace.layers.iter().zip(&params.layers).zip(&mut grads.layers).rev() {
        dx = layer_backward(cache, layer, &dx, grad);
    }

    let dx = apply_mask(dx, &trace.prenet_mask);
    linear_backward(&trace.features.view(), &params.prenet, &dx, &mut grads.prenet);
    Ok(())
}
