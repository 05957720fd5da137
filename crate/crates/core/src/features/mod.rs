//! MFCC front end and SpecAugment-style masking.

mod config;
mod dump;
mod mask;
mod mel;
mod mfcc;
mod stft;

pub use config::FeatureConfig;
pub use dump::{read_feature_dump, write_feature_dump};
pub use mask::{apply_freq_augment, apply_mask, Mask, MaskAxis, MaskSpec};
pub use mel::{dct_matrix, hz_to_mel, mel_filterbank, mel_to_hz};
pub use mfcc::{FeatureMatrix, MfccExtractor};
pub use stft::{hann_window, Stft};
