//! Spoken command spotting toolkit.
//!
//! The pipeline is split the same way the data flows:
//!
//! ```text
//! audio_io  WAV files, label map, JSONL manifests, NULL-class noise clips
//!    |
//! augment   online time-domain augmentation (noise, reverb, gain, fades)
//!    |
//! features  STFT -> mel filterbank -> log -> DCT-II (MFCC), SpecAugment masks
//!    |
//! model     ConformerGRU classifier with hand-written backward pass
//!    |
//! training  NLL loss, Adam with linear LR decay, accuracy, train / evaluate
//! ```
//!
//! Every stochastic step draws from an explicit [`rng::StreamRng`] derived from
//! `(seed, utterance id, epoch)`, so runs are reproducible regardless of how
//! the data pipeline is parallelised.

pub mod audio_io;
pub mod augment;
pub mod error;
pub mod features;
pub mod model;
pub mod rng;
pub mod toy;
pub mod training;

pub use error::{Error, Result};
