use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::audio_io::Waveform;
use crate::{Error, Result};

/// Fade-in curve on `[0, 1]`, monotone with `shape(0) = 0` and `shape(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadeShape {
    Linear,
    Exponential,
    Logarithmic,
    QuarterSine,
    HalfSine,
}

impl FadeShape {
    pub const ALL: [FadeShape; 5] = [
        FadeShape::Linear,
        FadeShape::Exponential,
        FadeShape::Logarithmic,
        FadeShape::QuarterSine,
        FadeShape::HalfSine,
    ];

    pub fn eval(self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            FadeShape::Linear => t,
            FadeShape::Exponential => (5.0 * t).exp_m1() / 5f64.exp_m1(),
            FadeShape::Logarithmic => (9.0 * t).ln_1p() / 10f64.ln(),
            FadeShape::QuarterSine => (PI * t / 2.0).sin(),
            FadeShape::HalfSine => (1.0 - (PI * t).cos()) / 2.0,
        }
    }

    /// `len` points from 0 to 1 inclusive. A single point sits at 0.
    fn ramp(self, len: usize) -> impl Iterator<Item = f64> {
        let denom = len.saturating_sub(1).max(1) as f64;
        (0..len).map(move |i| self.eval(i as f64 / denom))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadeDraw {
    pub in_shape: FadeShape,
    pub in_len: usize,
    pub out_shape: FadeShape,
    pub out_len: usize,
}

impl FadeDraw {
    pub fn none() -> Self {
        Self {
            in_shape: FadeShape::Linear,
            in_len: 0,
            out_shape: FadeShape::Linear,
            out_len: 0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(signal_len: usize, rng: &mut R) -> Self {
        let in_shape = FadeShape::ALL[rng.random_range(0..FadeShape::ALL.len())];
        let in_len = rng.random_range(0..=signal_len);
        let out_shape = FadeShape::ALL[rng.random_range(0..FadeShape::ALL.len())];
        let out_len = rng.random_range(0..=signal_len);
        Self {
            in_shape,
            in_len,
            out_shape,
            out_len,
        }
    }

    /// Envelope `F_in[i] * F_out[i]` for a signal of `len` samples.
    pub fn envelope(&self, len: usize) -> Result<Vec<f64>> {
        if self.in_len > len || self.out_len > len {
            return Err(Error::Validation(format!(
                "fade lengths {}/{} exceed signal length {len}",
                self.in_len, self.out_len
            )));
        }
        let mut env = vec![1.0; len];
        for (e, g) in env.iter_mut().zip(self.in_shape.ramp(self.in_len)) {
            *e *= g;
        }
        // fade-out is the fade-in curve played backwards
        let start = len - self.out_len;
        for (e, g) in env[start..].iter_mut().rev().zip(self.out_shape.ramp(self.out_len)) {
            *e *= g;
        }
        Ok(env)
    }

    pub fn apply(&self, x: &Waveform) -> Result<Waveform> {
        let env = self.envelope(x.len())?;
        Ok(x.with_samples(x.samples().iter().zip(&env).map(|(s, g)| s * g).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn shapes_are_monotone_with_fixed_endpoints() {
        for shape in FadeShape::ALL {
            assert!(shape.eval(0.0).abs() < 1e-15, "{shape:?}");
            assert!((shape.eval(1.0) - 1.0).abs() < 1e-15, "{shape:?}");
            let mut prev = 0.0;
            for i in 1..=1000 {
                let v = shape.eval(i as f64 / 1000.0);
                assert!(v >= prev, "{shape:?} not monotone at {i}");
                prev = v;
            }
        }
    }

    #[test]
    fn linear_fade_in_over_four_samples() {
        let x = Waveform::new(vec![1.0; 4], 16_000).unwrap();
        let draw = FadeDraw { in_len: 4, ..FadeDraw::none() };
        let y = draw.apply(&x).unwrap();
        let expected = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in y.samples().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_lengths_are_identity() {
        let x = Waveform::new(vec![0.3, -0.2, 0.9], 16_000).unwrap();
        assert_eq!(FadeDraw::none().apply(&x).unwrap(), x);
    }

    #[test]
    fn full_half_sine_fade_out_ends_at_zero() {
        let x = Waveform::new(vec![0.7; 10], 16_000).unwrap();
        let draw = FadeDraw {
            out_shape: FadeShape::HalfSine,
            out_len: 10,
            ..FadeDraw::none()
        };
        let y = draw.apply(&x).unwrap();
        assert_eq!(y.samples()[9], 0.0);
        assert!((y.samples()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn sampled_lengths_cover_range() {
        let mut r = rng::seeded(4);
        let mut saw_full = false;
        let mut saw_zero = false;
        for _ in 0..2000 {
            let d = FadeDraw::sample(5, &mut r);
            assert!(d.in_len <= 5 && d.out_len <= 5);
            saw_full |= d.in_len == 5;
            saw_zero |= d.out_len == 0;
        }
        assert!(saw_full && saw_zero);
    }

    #[test]
    fn overlong_draw_is_rejected() {
        let x = Waveform::new(vec![1.0; 3], 16_000).unwrap();
        assert!(FadeDraw { in_len: 4, ..FadeDraw::none() }.apply(&x).is_err());
    }
}
