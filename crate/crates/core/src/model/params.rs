//! Named parameter tensors of the ConformerGRU.
//!
//! Linear weights are stored `fan_in x fan_out`, so a layer computes
//! `x.dot(weight) + bias` on row-major `frames x features` activations.
//! The same structs double as gradient containers.

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;

use super::config::{param_count, ModelConfig};
use super::scalar::Scalar;
use crate::rng::{self, StreamRng};
use crate::{Error, Result};

/// Uniform traversal over every tensor, in a fixed order, with dotted names.
pub trait Module<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>);
    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>);
}

impl<T> Module<T> for Array1<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        out.push((prefix.to_string(), self.view().into_dyn()));
    }
    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        out.push((prefix.to_string(), self.view_mut().into_dyn()));
    }
}

impl<T> Module<T> for Array2<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        out.push((prefix.to_string(), self.view().into_dyn()));
    }
    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        out.push((prefix.to_string(), self.view_mut().into_dyn()));
    }
}

impl<T, M: Module<T>> Module<T> for Vec<M> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        for (i, m) in self.iter().enumerate() {
            m.tensors(&join(prefix, &i.to_string()), out);
        }
    }
    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        for (i, m) in self.iter_mut().enumerate() {
            m.tensors_mut(&join(prefix, &i.to_string()), out);
        }
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

macro_rules! module {
    ($ty:ident { $($field:ident),+ $(,)? }) => {
        impl<T: Scalar> Module<T> for $ty<T> {
            fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
                $( self.$field.tensors(&join(prefix, stringify!($field)), out); )+
            }
            fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
                $( self.$field.tensors_mut(&join(prefix, stringify!($field)), out); )+
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm<T> {
    pub gain: Array1<T>,
    pub offset: Array1<T>,
}

/// Pre-norm feed-forward block, applied with a half-step residual.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward<T> {
    pub norm: LayerNorm<T>,
    pub inner: Linear<T>,
    pub outer: Linear<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfAttention<T> {
    pub norm: LayerNorm<T>,
    pub query: Linear<T>,
    pub key: Linear<T>,
    pub value: Linear<T>,
    pub output: Linear<T>,
}

/// Gated pointwise conv, depthwise conv (kernel x channels), norm, pointwise conv.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvModule<T> {
    pub norm: LayerNorm<T>,
    pub pointwise_in: Linear<T>,
    pub depthwise_weight: Array2<T>,
    pub depthwise_bias: Array1<T>,
    pub depthwise_norm: LayerNorm<T>,
    pub pointwise_out: Linear<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformerLayer<T> {
    pub ff1: FeedForward<T>,
    pub attention: SelfAttention<T>,
    pub conv: ConvModule<T>,
    pub ff2: FeedForward<T>,
    pub final_norm: LayerNorm<T>,
}

/// One GRU direction. Gate columns are ordered reset, update, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct GruDirection<T> {
    pub input: Linear<T>,
    pub hidden: Linear<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameters<T> {
    pub config: ModelConfig,
    pub prenet: Linear<T>,
    pub layers: Vec<ConformerLayer<T>>,
    pub gru_forward: GruDirection<T>,
    pub gru_backward: GruDirection<T>,
    pub postnet: Linear<T>,
    pub classifier: Linear<T>,
}

module!(Linear { weight, bias });
module!(LayerNorm { gain, offset });
module!(FeedForward { norm, inner, outer });
module!(SelfAttention { norm, query, key, value, output });
module!(ConvModule { norm, pointwise_in, depthwise_weight, depthwise_bias, depthwise_norm, pointwise_out });
module!(ConformerLayer { ff1, attention, conv, ff2, final_norm });
module!(GruDirection { input, hidden });
module!(Parameters { prenet, layers, gru_forward, gru_backward, postnet, classifier });

fn uniform<T: Scalar>(shape: (usize, usize), fan_in: usize, rng: &mut StreamRng) -> Array2<T> {
    let bound = (1.0 / fan_in as f64).sqrt();
    Array2::from_shape_simple_fn(shape, || T::of(rng.random_range(-bound..bound)))
}

impl<T: Scalar> Linear<T> {
    fn init(fan_in: usize, fan_out: usize, rng: &mut StreamRng) -> Self {
        Self {
            weight: uniform((fan_in, fan_out), fan_in, rng),
            bias: Array1::zeros(fan_out),
        }
    }
}

impl<T: Scalar> LayerNorm<T> {
    fn init(dim: usize) -> Self {
        Self {
            gain: Array1::ones(dim),
            offset: Array1::zeros(dim),
        }
    }
}

impl<T: Scalar> FeedForward<T> {
    fn init(d: usize, expansion: usize, rng: &mut StreamRng) -> Self {
        Self {
            norm: LayerNorm::init(d),
            inner: Linear::init(d, expansion * d, rng),
            outer: Linear::init(expansion * d, d, rng),
        }
    }
}

impl<T: Scalar> ConformerLayer<T> {
    fn init(config: &ModelConfig, rng: &mut StreamRng) -> Self {
        let d = config.d_model;
        let k = config.conv_kernel;
        Self {
            ff1: FeedForward::init(d, config.ff_expansion, rng),
            attention: SelfAttention {
                norm: LayerNorm::init(d),
                query: Linear::init(d, d, rng),
                key: Linear::init(d, d, rng),
                value: Linear::init(d, d, rng),
                output: Linear::init(d, d, rng),
            },
            conv: ConvModule {
                norm: LayerNorm::init(d),
                pointwise_in: Linear::init(d, 2 * d, rng),
                depthwise_weight: uniform((k, d), k, rng),
                depthwise_bias: Array1::zeros(d),
                depthwise_norm: LayerNorm::init(d),
                pointwise_out: Linear::init(d, d, rng),
            },
            ff2: FeedForward::init(d, config.ff_expansion, rng),
            final_norm: LayerNorm::init(d),
        }
    }
}

impl<T: Scalar> GruDirection<T> {
    fn init(input: usize, hidden: usize, rng: &mut StreamRng) -> Self {
        Self {
            input: Linear::init(input, 3 * hidden, rng),
            hidden: Linear::init(hidden, 3 * hidden, rng),
        }
    }
}

/// Deterministic initialisation: weights `U(-s, s)` with `s = sqrt(1/fan_in)`,
/// zero biases, unit layer-norm gains. Values are drawn in `f64` and then
/// rounded, so `f32` and `f64` parameter sets agree up to rounding.
pub fn init_parameters<T: Scalar>(config: &ModelConfig, seed: u64) -> Result<Parameters<T>> {
    config.validate()?;
    let mut rng = rng::stream(seed, "init", 0);
    let d = config.d_model;
    let h = config.gru_hidden;
    let prenet = Linear::init(config.n_features, d, &mut rng);
    let layers = (0..config.n_layers)
        .map(|_| ConformerLayer::init(config, &mut rng))
        .collect();
    let gru_forward = GruDirection::init(d, h, &mut rng);
    let gru_backward = GruDirection::init(d, h, &mut rng);
    let postnet = Linear::init(2 * h, d, &mut rng);
    let classifier = Linear::init(d, config.n_classes, &mut rng);
    let params = Parameters {
        config: config.clone(),
        prenet,
        layers,
        gru_forward,
        gru_backward,
        postnet,
        classifier,
    };
    debug_assert_eq!(params.num_scalars(), param_count(config));
    Ok(params)
}

impl<T: Scalar> Parameters<T> {
    pub fn named_tensors(&self) -> Vec<(String, ArrayViewD<'_, T>)> {
        let mut out = Vec::new();
        self.tensors("", &mut out);
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, T>)> {
        let mut out = Vec::new();
        self.tensors_mut("", &mut out);
        out
    }

    pub fn num_scalars(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Same shapes, all zeros. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, mut t) in z.named_tensors_mut() {
            t.fill(T::zero());
        }
        z
    }

    pub fn add_assign(&mut self, other: &Self) {
        let theirs = other.named_tensors();
        for ((_, mut mine), (_, t)) in self.named_tensors_mut().into_iter().zip(theirs) {
            mine += &t;
        }
    }

    pub fn scale(&mut self, factor: T) {
        for (_, mut t) in self.named_tensors_mut() {
            t.mapv_inplace(|v| v * factor);
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.named_tensors()
            .iter()
            .flat_map(|(_, t)| t.iter().map(|v| v.f64() * v.f64()))
            .sum()
    }

    /// Name of the first tensor holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<String> {
        self.named_tensors()
            .into_iter()
            .find(|(_, t)| t.iter().any(|v| !v.is_finite()))
            .map(|(name, _)| name)
    }

    /// Element-wise conversion to another precision.
    pub fn cast<U: Scalar>(&self) -> Parameters<U> {
        let mut out: Parameters<U> = init_parameters(&self.config, 0).expect("config already validated");
        let src = self.named_tensors();
        for ((_, mut dst), (_, s)) in out.named_tensors_mut().into_iter().zip(src) {
            dst.zip_mut_with(&s, |d, v| *d = U::of(v.f64()));
        }
        out
    }

    pub fn check_shapes(&self, other: &Self) -> Result<()> {
        let a = self.named_tensors();
        let b = other.named_tensors();
        let same = a.len() == b.len()
            && a.iter().zip(&b).all(|((na, ta), (nb, tb))| na == nb && ta.shape() == tb.shape());
        if same {
            Ok(())
        } else {
            Err(Error::Consistency("parameter sets have different layouts".into()))
        }
    }
}
