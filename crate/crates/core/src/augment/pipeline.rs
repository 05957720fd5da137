use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use super::fade::FadeDraw;
use super::ops::{GainDraw, ImpulseResponseSet, NoiseBank, NoiseDraw, ReverbDraw};
use super::policy::{AugmentationPolicy, TimeOp};
use super::scheduler::select_ops;
use crate::audio_io::Waveform;
use crate::{Error, Result};

/// A time-domain operator together with its random choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeAugment {
    Noise(NoiseDraw),
    Reverb(ReverbDraw),
    Gain(GainDraw),
    Fade(FadeDraw),
}

/// Policy plus the immutable audio resources the operators draw from.
///
/// Shareable across worker threads; the only mutable state is an
/// instrumentation counter of time-augmentation calls.
#[derive(Debug)]
pub struct Augmenter {
    policy: AugmentationPolicy,
    noise: Option<NoiseBank>,
    impulse_responses: Option<ImpulseResponseSet>,
    invocations: AtomicU64,
}

impl Augmenter {
    pub fn new(
        policy: AugmentationPolicy,
        noise: Option<NoiseBank>,
        impulse_responses: Option<ImpulseResponseSet>,
    ) -> Result<Self> {
        policy.validate()?;
        if policy.time_ops.contains(&TimeOp::Noise) && noise.is_none() {
            return Err(Error::Config("noise injection is registered but no noise bank was given".into()));
        }
        if policy.time_ops.contains(&TimeOp::Reverb) && impulse_responses.is_none() {
            return Err(Error::Config(
                "reverberation is registered but no impulse responses were given".into(),
            ));
        }
        Ok(Self {
            policy,
            noise,
            impulse_responses,
            invocations: AtomicU64::new(0),
        })
    }

    pub fn policy(&self) -> &AugmentationPolicy {
        &self.policy
    }

    /// Number of `apply_time_augment` calls so far.
    pub fn invocations(&self) -> u64 {
        self.invocations.load(Ordering::Relaxed)
    }

    fn draw<R: Rng + ?Sized>(&self, op: TimeOp, signal_len: usize, rng: &mut R) -> TimeAugment {
        match op {
            TimeOp::Noise => {
                let bank = self.noise.as_ref().expect("checked in new");
                TimeAugment::Noise(NoiseDraw::sample(bank.len(), signal_len, rng))
            }
            TimeOp::Reverb => {
                let irs = self.impulse_responses.as_ref().expect("checked in new");
                TimeAugment::Reverb(ReverbDraw::sample(irs, rng))
            }
            TimeOp::Gain => TimeAugment::Gain(GainDraw::sample(rng)),
            TimeOp::Fade => TimeAugment::Fade(FadeDraw::sample(signal_len, rng)),
        }
    }

    pub fn apply_op(&self, x: &Waveform, op: &TimeAugment) -> Result<Waveform> {
        let missing = |what: &str| Error::Config(format!("{what} not loaded"));
        match op {
            TimeAugment::Noise(d) => d.apply(x, self.noise.as_ref().ok_or_else(|| missing("noise bank"))?),
            TimeAugment::Reverb(d) => d.apply(
                x,
                self.impulse_responses
                    .as_ref()
                    .ok_or_else(|| missing("impulse responses"))?,
            ),
            TimeAugment::Gain(d) => Ok(d.apply(x)),
            TimeAugment::Fade(d) => d.apply(x),
        }
    }

    /// Applies a fixed operator sequence in order.
    pub fn apply_time_ops(&self, x: &Waveform, ops: &[TimeAugment]) -> Result<Waveform> {
        ops.iter().try_fold(x.clone(), |acc, op| self.apply_op(&acc, op))
    }

    /// Selects operators at rate lambda, shuffles them, then applies each with
    /// fresh random choices. Output length always equals input length.
    pub fn apply_time_augment<R: Rng + ?Sized>(&self, x: &Waveform, rng: &mut R) -> Waveform {
        self.invocations.fetch_add(1, Ordering::Relaxed);
        let ops = select_ops(&self.policy.time_ops, self.policy.lambda_rate, rng);
        let mut out = x.clone();
        for op in ops {
            let draw = self.draw(op, out.len(), rng);
            out = self
                .apply_op(&out, &draw)
                .expect("sampled draws always fit the signal");
        }
        out
    }
}
