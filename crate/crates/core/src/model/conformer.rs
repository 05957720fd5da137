//! One conformer layer: half-step feed-forward, self-attention, convolution
//! module, half-step feed-forward, final layer norm.

use ndarray::{s, Array2};

use super::ops::{
    apply_mask, check_finite, depthwise, depthwise_backward, dropout_mask, glu, glu_backward, layer_norm,
    layer_norm_backward, linear, linear_backward, softmax_rows, softmax_rows_backward, swish, swish_backward, Mode,
    NormCache,
};
use super::params::{ConformerLayer, ConvModule, FeedForward, SelfAttention};
use super::scalar::Scalar;
use crate::Result;

pub(crate) struct FeedForwardCache<T> {
    norm: NormCache<T>,
    normed: Array2<T>,
    pre_activation: Array2<T>,
    hidden: Array2<T>,
    hidden_mask: Option<Array2<T>>,
    out_mask: Option<Array2<T>>,
}

fn feed_forward<T: Scalar>(
    x: &Array2<T>,
    block: &FeedForward<T>,
    p: f64,
    mode: &mut Mode<'_>,
) -> (Array2<T>, FeedForwardCache<T>) {
    let (normed, norm) = layer_norm(x, &block.norm);
    let pre_activation = linear(&normed.view(), &block.inner);
    let hidden_mask = dropout_mask(pre_activation.dim(), p, mode);
    let hidden = apply_mask(swish(&pre_activation), &hidden_mask);
    let out = linear(&hidden.view(), &block.outer);
    let out_mask = dropout_mask(out.dim(), p, mode);
    let out = apply_mask(out, &out_mask);
    let y = x + &(out * T::of(0.5));
    let cache = FeedForwardCache { norm, normed, pre_activation, hidden, hidden_mask, out_mask };
    (y, cache)
}

fn feed_forward_backward<T: Scalar>(
    cache: &FeedForwardCache<T>,
    block: &FeedForward<T>,
    dy: &Array2<T>,
    grad: &mut FeedForward<T>,
) -> Array2<T> {
    let d_out = apply_mask(dy * T::of(0.5), &cache.out_mask);
    let d_hidden = linear_backward(&cache.hidden.view(), &block.outer, &d_out, &mut grad.outer);
    let d_hidden = apply_mask(d_hidden, &cache.hidden_mask);
    let d_pre = swish_backward(&cache.pre_activation, &d_hidden);
    let d_normed = linear_backward(&cache.normed.view(), &block.inner, &d_pre, &mut grad.inner);
    dy + &layer_norm_backward(&cache.norm, &block.norm, &d_normed, &mut grad.norm)
}

pub(crate) struct AttentionCache<T> {
    norm: NormCache<T>,
    normed: Array2<T>,
    query: Array2<T>,
    key: Array2<T>,
    value: Array2<T>,
    /// Per head, `frames x frames`, rows sum to one.
    weights: Vec<Array2<T>>,
    context: Array2<T>,
    out_mask: Option<Array2<T>>,
}

impl<T> AttentionCache<T> {
    pub(crate) fn weights(&self) -> &[Array2<T>] {
        &self.weights
    }
}

fn attention<T: Scalar>(
    x: &Array2<T>,
    block: &SelfAttention<T>,
    heads: usize,
    p: f64,
    mode: &mut Mode<'_>,
) -> (Array2<T>, AttentionCache<T>) {
    let (normed, norm) = layer_norm(x, &block.norm);
    let nv = normed.view();
    let query = linear(&nv, &block.query);
    let key = linear(&nv, &block.key);
    let value = linear(&nv, &block.value);
    let dk = x.ncols() / heads;
    let scale = T::of(1.0 / (dk as f64).sqrt());
    let mut context = Array2::zeros(x.raw_dim());
    let mut weights = Vec::with_capacity(heads);
    for h in 0..heads {
        let cols = s![.., h * dk..(h + 1) * dk];
        let mut w = query.slice(cols).dot(&key.slice(cols).t()) * scale;
        softmax_rows(&mut w);
        context.slice_mut(cols).assign(&w.dot(&value.slice(cols)));
        weights.push(w);
    }
    let out = linear(&context.view(), &block.output);
    let out_mask = dropout_mask(out.dim(), p, mode);
    let y = x + &apply_mask(out, &out_mask);
    let cache = AttentionCache { norm, normed, query, key, value, weights, context, out_mask };
    (y, cache)
}

fn attention_backward<T: Scalar>(
    cache: &AttentionCache<T>,
    block: &SelfAttention<T>,
    dy: &Array2<T>,
    grad: &mut SelfAttention<T>,
) -> Array2<T> {
    let heads = cache.weights.len();
    let dk = dy.ncols() / heads;
    let scale = T::of(1.0 / (dk as f64).sqrt());
    let d_out = apply_mask(dy.clone(), &cache.out_mask);
    let d_context = linear_backward(&cache.context.view(), &block.output, &d_out, &mut grad.output);
    let mut d_query = Array2::zeros(dy.raw_dim());
    let mut d_key = Array2::zeros(dy.raw_dim());
    let mut d_value = Array2::zeros(dy.raw_dim());
    for (h, w) in cache.weights.iter().enumerate() {
        let cols = s![.., h * dk..(h + 1) * dk];
        let dc = d_context.slice(cols);
        let dw = dc.dot(&cache.value.slice(cols).t());
        d_value.slice_mut(cols).assign(&w.t().dot(&dc));
        let ds = softmax_rows_backward(w, &dw) * scale;
        d_query.slice_mut(cols).assign(&ds.dot(&cache.key.slice(cols)));
        d_key.slice_mut(cols).assign(&ds.t().dot(&cache.query.slice(cols)));
    }
    let nv = cache.normed.view();
    let mut d_normed = linear_backward(&nv, &block.query, &d_query, &mut grad.query);
    d_normed += &linear_backward(&nv, &block.key, &d_key, &mut grad.key);
    d_normed += &linear_backward(&nv, &block.value, &d_value, &mut grad.value);
    dy + &layer_norm_backward(&cache.norm, &block.norm, &d_normed, &mut grad.norm)
}

pub(crate) struct ConvCache<T> {
    norm: NormCache<T>,
    normed: Array2<T>,
    expanded: Array2<T>,
    gated: Array2<T>,
    depth_norm: NormCache<T>,
    depth_normed: Array2<T>,
    activated: Array2<T>,
    out_mask: Option<Array2<T>>,
}

fn convolution<T: Scalar>(
    x: &Array2<T>,
    block: &ConvModule<T>,
    p: f64,
    mode: &mut Mode<'_>,
) -> (Array2<T>, ConvCache<T>) {
    let (normed, norm) = layer_norm(x, &block.norm);
    let expanded = linear(&normed.view(), &block.pointwise_in);
    let gated = glu(&expanded);
    let convolved = depthwise(&gated, &block.depthwise_weight, &block.depthwise_bias);
    let (depth_normed, depth_norm) = layer_norm(&convolved, &block.depthwise_norm);
    let activated = swish(&depth_normed);
    let out = linear(&activated.view(), &block.pointwise_out);
    let out_mask = dropout_mask(out.dim(), p, mode);
    let y = x + &apply_mask(out, &out_mask);
    let cache = ConvCache { norm, normed, expanded, gated, depth_norm, depth_normed, activated, out_mask };
    (y, cache)
}

fn convolution_backward<T: Scalar>(
    cache: &ConvCache<T>,
    block: &ConvModule<T>,
    dy: &Array2<T>,
    grad: &mut ConvModule<T>,
) -> Array2<T> {
    let d_out = apply_mask(dy.clone(), &cache.out_mask);
    let d_act = linear_backward(&cache.activated.view(), &block.pointwise_out, &d_out, &mut grad.pointwise_out);
    let d_depth_normed = swish_backward(&cache.depth_normed, &d_act);
    let d_conv = layer_norm_backward(&cache.depth_norm, &block.depthwise_norm, &d_depth_normed, &mut grad.depthwise_norm);
    let d_gated = depthwise_backward(
        &cache.gated,
        &block.depthwise_weight,
        &d_conv,
        &mut grad.depthwise_weight,
        &mut grad.depthwise_bias,
    );
    let d_expanded = glu_backward(&cache.expanded, &d_gated);
    let d_normed = linear_backward(&cache.normed.view(), &block.pointwise_in, &d_expanded, &mut grad.pointwise_in);
    dy + &layer_norm_backward(&cache.norm, &block.norm, &d_normed, &mut grad.norm)
}

pub(crate) struct LayerCache<T> {
    ff1: FeedForwardCache<T>,
    pub(crate) attention: AttentionCache<T>,
    conv: ConvCache<T>,
    ff2: FeedForwardCache<T>,
    final_norm: NormCache<T>,
}

/// Forward through one layer. `name` labels numeric faults, e.g. `layers.0`.
pub(crate) fn layer_forward<T: Scalar>(
    x: &Array2<T>,
    layer: &ConformerLayer<T>,
    heads: usize,
    p: f64,
    mode: &mut Mode<'_>,
    name: &str,
) -> Result<(Array2<T>, LayerCache<T>)> {
    let (x1, ff1) = feed_forward(x, &layer.ff1, p, mode);
    check_finite(&x1, || format!("{name}.ff1"))?;
    let (x2, attention) = attention(&x1, &layer.attention, heads, p, mode);
    check_finite(&x2, || format!("{name}.attention"))?;
    let (x3, conv) = convolution(&x2, &layer.conv, p, mode);
    check_finite(&x3, || format!("{name}.conv"))?;
    let (x4, ff2) = feed_forward(&x3, &layer.ff2, p, mode);
    check_finite(&x4, || format!("{name}.ff2"))?;
    let (y, final_norm) = layer_norm(&x4, &layer.final_norm);
    check_finite(&y, || format!("{name}.final_norm"))?;
    Ok((y, LayerCache { ff1, attention, conv, ff2, final_norm }))
}

pub(crate) fn layer_backward<T: Scalar>(
    cache: &LayerCache<T>,
    layer: &ConformerLayer<T>,
    dy: &Array2<T>,
    grad: &mut ConformerLayer<T>,
) -> Array2<T> {
    let d4 = layer_norm_backward(&cache.final_norm, &layer.final_norm, dy, &mut grad.final_norm);
    let d3 = feed_forward_backward(&cache.ff2, &layer.ff2, &d4, &mut grad.ff2);
    let d2 = convolution_backward(&cache.conv, &layer.conv, &d3, &mut grad.conv);
    let d1 = attention_backward(&cache.attention, &layer.attention, &d2, &mut grad.attention);
    feed_forward_backward(&cache.ff1, &layer.ff1, &d1, &mut grad.ff1)
}
