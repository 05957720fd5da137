//! Feature dump: one JSON header line, then row-major little-endian f32.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::mfcc::FeatureMatrix;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct DumpHeader {
    shape: [usize; 2],
    fingerprint: String,
}

pub fn write_feature_dump(path: impl AsRef<Path>, feat: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let header = DumpHeader {
        shape: [feat.n_frames(), feat.n_coeffs()],
        fingerprint: feat.fingerprint().to_string(),
    };
    let mut bytes = serde_json::to_vec(&header).map_err(|e| Error::Validation(e.to_string()))?;
    bytes.push(b'\n');
    for v in feat.data().iter() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_feature_dump(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Validation("feature dump has no header line".into()))?;
    let header: DumpHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::Validation(format!("feature dump header: {e}")))?;
    let body = &bytes[newline + 1..];
    let [rows, cols] = header.shape;
    if body.len() != rows * cols * 4 {
        return Err(Error::Validation(format!(
            "feature dump body has {} bytes, expected {}",
            body.len(),
            rows * cols * 4
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    let data = Array2::from_shape_vec((rows, cols), values).expect("length checked above");
    FeatureMatrix::new(data, header.fingerprint)
}
