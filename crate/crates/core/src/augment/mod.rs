//! Online time-domain augmentation and the per-signal operator scheduler.
//!
//! Each operator comes in two layers: a `*Draw` value holding every random
//! choice the operator makes, and an `apply` that is a pure function of the
//! signal and that draw. Sampling a draw from a [`StreamRng`] and applying it
//! is the stochastic operator; constructing the draw by hand gives exact,
//! forced behaviour for tests.
//!
//! [`StreamRng`]: crate::rng::StreamRng

mod fade;
mod ops;
mod pipeline;
mod policy;
mod scheduler;

pub use fade::{FadeDraw, FadeShape};
pub use ops::{
    convolve_truncated, GainDraw, ImpulseResponseSet, NoiseBank, NoiseDraw, ReverbDraw,
    GAIN_MAX, GAIN_MIN, REVERB_MAX_SAMPLES, REVERB_MIN_SAMPLES,
};
pub use pipeline::{Augmenter, TimeAugment};
pub use policy::{AugmentationPolicy, FreqOp, TimeOp};
pub use scheduler::select_ops;
