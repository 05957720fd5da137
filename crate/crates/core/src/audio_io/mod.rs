//! Audio files, labels and dataset manifests.

mod labels;
mod manifest;
mod noise;
mod wav;

pub use labels::{LabelMap, COMMANDS, NULL_LABEL};
pub use manifest::{
    build_manifest, read_manifest, scan_synthetic, write_manifest, ManifestEntry, Source, Split, SplitSpec,
};
pub use noise::{carve_noise_clips, CarvedClip};
pub use wav::{read_wav, read_wav_dir, write_wav, Waveform, DATASET_SAMPLE_RATE};
