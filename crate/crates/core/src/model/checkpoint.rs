//! Checkpoint container.
//!
//! Layout: the 8-byte magic `KWSCKPT1`, a little-endian `u32` header length,
//! a UTF-8 JSON header, then every tensor as little-endian `f32` in header
//! order. Shapes are declared in the header and checked on load.

use std::fs;
use std::path::Path;

use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::params::{init_parameters, Parameters};
use crate::audio_io::LabelMap;
use crate::features::FeatureConfig;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"KWSCKPT1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub init: u64,
    pub train: u64,
    pub augment: u64,
}

/// Everything in a checkpoint except the tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub model_config: ModelConfig,
    pub feature_config: FeatureConfig,
    pub feature_fingerprint: String,
    pub labels: LabelMap,
    pub seeds: Seeds,
    pub epoch: usize,
    /// Dev accuracy in percent at the time of saving, if measured.
    pub dev_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorSpec {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    #[serde(flatten)]
    meta: CheckpointMeta,
    tensors: Vec<TensorSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub params: Parameters<f32>,
}

impl Checkpoint {
    pub fn new(meta: CheckpointMeta, params: Parameters<f32>) -> Result<Self> {
        if meta.model_config != params.config {
            return Err(Error::Checkpoint("metadata and parameters disagree on the model config".into()));
        }
        if meta.labels.len() != params.config.n_classes {
            return Err(Error::Checkpoint(format!(
                "{} labels for a {}-class model",
                meta.labels.len(),
                params.config.n_classes
            )));
        }
        Ok(Self { meta, params })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tensors = self.params.named_tensors();
        let header = Header {
            format_version: FORMAT_VERSION,
            meta: self.meta.clone(),
            tensors: tensors
                .iter()
                .map(|(name, t)| TensorSpec { name: name.clone(), shape: t.shape().to_vec() })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header is serializable");
        let mut out = Vec::with_capacity(12 + json.len() + 4 * self.params.num_scalars());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in &tensors {
            for v in t.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let json = bytes.get(12..12 + header_len).ok_or_else(|| bad("truncated header"))?;
        let header: Header =
            serde_json::from_slice(json).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {}", header.format_version)));
        }
        let mut params: Parameters<f32> = init_parameters(&header.meta.model_config, 0)
            .map_err(|e| Error::Checkpoint(format!("bad model config: {e}")))?;
        let mut cursor = 12 + header_len;
        {
            let mut slots = params.named_tensors_mut();
            if slots.len() != header.tensors.len() {
                return Err(bad("tensor list does not match the model config"));
            }
            for ((name, slot), spec) in slots.iter_mut().zip(&header.tensors) {
                if *name != spec.name || slot.shape() != spec.shape.as_slice() {
                    return Err(Error::Checkpoint(format!("unexpected tensor {} {:?}", spec.name, spec.shape)));
                }
                let n = slot.len();
                let raw = bytes.get(cursor..cursor + 4 * n).ok_or_else(|| bad("truncated tensor data"))?;
                let values: Vec<f32> = raw
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect();
                let loaded = ArrayD::from_shape_vec(spec.shape.clone(), values).expect("length checked");
                slot.assign(&loaded);
                cursor += 4 * n;
            }
        }
        if cursor != bytes.len() {
            return Err(bad("trailing bytes after tensor data"));
        }
        if let Some(name) = params.first_non_finite() {
            return Err(Error::Checkpoint(format!("tensor {name} holds non-finite values")));
        }
        Self::new(header.meta, params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
