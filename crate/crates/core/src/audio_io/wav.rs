//! Minimal RIFF/WAVE codec for mono PCM16 and IEEE float32.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Sample rate of every clip in the command dataset.
pub const DATASET_SAMPLE_RATE: u32 = 16_000;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xfffe;

/// Mono signal with its sample rate. Samples are kept in `f64`; nominal
/// range is [-1, 1] but augmentation may push values outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Validation("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Validation(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a waveform from samples already known to be finite.
    pub(crate) fn from_trusted(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Returns the same signal with new samples, keeping the rate.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self::from_trusted(samples, self.sample_rate)
    }

    pub fn ensure_rate(&self, rate: u32) -> Result<()> {
        if self.sample_rate != rate {
            return Err(Error::Validation(format!(
                "sample rate {} Hz, expected {rate} Hz (resample the file first)",
                self.sample_rate
            )));
        }
        Ok(())
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Fmt {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn parse_fmt(body: &[u8]) -> Result<Fmt> {
    if body.len() < 16 {
        return Err(Error::Format("fmt chunk shorter than 16 bytes".into()));
    }
    let mut format = u16_at(body, 0);
    if format == FORMAT_EXTENSIBLE {
        if body.len() < 26 {
            return Err(Error::Format("extensible fmt chunk is truncated".into()));
        }
        // First two bytes of the sub-format GUID carry the real format tag.
        format = u16_at(body, 24);
    }
    Ok(Fmt {
        format,
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        bits: u16_at(body, 14),
    })
}

/// Decodes a mono PCM16 or float32 WAV file. PCM16 codes map to `s / 32768`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes)
}

pub(crate) fn decode_wav(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("missing RIFF/WAVE signature".into()));
    }
    let mut fmt = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        if id == b"data" {
            let fmt: Fmt = fmt.ok_or_else(|| Error::Format("data chunk before fmt chunk".into()))?;
            let available = bytes.len() - body_start;
            if size > available {
                return Err(Error::Corrupt(format!(
                    "data chunk declares {size} bytes but only {available} remain"
                )));
            }
            return decode_samples(&fmt, &bytes[body_start..body_start + size]);
        }
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| Error::Format(format!("chunk `{}` overruns file", String::from_utf8_lossy(id))))?;
        if id == b"fmt " {
            fmt = Some(parse_fmt(&bytes[body_start..body_end])?);
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }
    Err(Error::Corrupt("no data chunk".into()))
}

fn decode_samples(fmt: &Fmt, data: &[u8]) -> Result<Waveform> {
    if fmt.channels != 1 {
        return Err(Error::UnsupportedLayout(format!(
            "{} channels, only mono is supported",
            fmt.channels
        )));
    }
    let samples: Vec<f64> = match (fmt.format, fmt.bits) {
        (FORMAT_PCM, 16) => {
            if !data.len().is_multiple_of(2) {
                return Err(Error::Corrupt("odd byte count in PCM16 data".into()));
            }
            data.chunks_exact(2)
                .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / 32768.0)
                .collect()
        }
        (FORMAT_FLOAT, 32) => {
            if !data.len().is_multiple_of(4) {
                return Err(Error::Corrupt("float32 data is not a multiple of 4 bytes".into()));
            }
            data.chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect()
        }
        (format, bits) => {
            return Err(Error::Format(format!(
                "unsupported encoding (format tag {format}, {bits} bits)"
            )))
        }
    };
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Corrupt("non-finite float sample".into()));
    }
    Waveform::new(samples, fmt.sample_rate)
}

fn pcm16_code(s: f64) -> i16 {
    (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

pub(crate) fn encode_wav(waveform: &Waveform) -> Vec<u8> {
    let data_len = waveform.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&waveform.sample_rate.to_le_bytes());
    out.extend_from_slice(&(waveform.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &waveform.samples {
        out.extend_from_slice(&pcm16_code(s).to_le_bytes());
    }
    out
}

/// Writes a canonical 44-byte-header PCM16 mono file, clamping to the PCM range.
/// Every `.wav` file directly inside `dir`, in file-name order.
pub fn read_wav_dir(dir: impl AsRef<Path>) -> Result<Vec<Waveform>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    paths.iter().map(read_wav).collect()
}

pub fn write_wav(path: impl AsRef<Path>, waveform: &Waveform) -> Result<()> {
    let path = path.as_ref();
    if let Some(i) = waveform.samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::Validation(format!("sample {i} is not finite")));
    }
    let bytes = encode_wav(waveform);
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pcm16_file(channels: u16, codes: &[i16]) -> Vec<u8> {
        let data_len = codes.len() * 2;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&16_000u32.to_le_bytes());
        out.extend_from_slice(&(32_000 * u32::from(channels)).to_le_bytes());
        out.extend_from_slice(&(2 * channels).to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data_len as u32).to_le_bytes());
        for c in codes {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    #[test]
    fn pcm16_maps_exact_code_points() {
        let w = decode_wav(&pcm16_file(1, &[0, 16384, -32768])).unwrap();
        assert_eq!(w.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(w.sample_rate(), 16_000);
    }

    #[test]
    fn one_second_file_has_16000_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.wav");
        write_wav(&path, &Waveform::new(vec![0.25; 16_000], 16_000).unwrap()).unwrap();
        assert_eq!(read_wav(&path).unwrap().len(), 16_000);
    }

    #[test]
    fn stereo_is_rejected() {
        let err = decode_wav(&pcm16_file(2, &[0, 0, 1, 1])).unwrap_err();
        assert!(matches!(err, Error::UnsupportedLayout(_)), "{err}");
    }

    #[test]
    fn truncated_data_is_corrupt() {
        let mut bytes = pcm16_file(1, &[1, 2, 3, 4]);
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode_wav(&bytes), Err(Error::Corrupt(_))));
    }

    #[test]
    fn bad_signature_is_format_error() {
        assert!(matches!(decode_wav(b"RIFX\0\0\0\0WAVE"), Err(Error::Format(_))));
        assert!(matches!(decode_wav(b""), Err(Error::Format(_))));
    }

    #[test]
    fn float32_is_decoded() {
        let mut bytes = pcm16_file(1, &[]);
        // patch to IEEE float, 32 bits, 2 samples
        bytes[20..22].copy_from_slice(&3u16.to_le_bytes());
        bytes[34..36].copy_from_slice(&32u16.to_le_bytes());
        bytes[40..44].copy_from_slice(&8u32.to_le_bytes());
        bytes.extend_from_slice(&0.75f32.to_le_bytes());
        bytes.extend_from_slice(&(-0.125f32).to_le_bytes());
        let w = decode_wav(&bytes).unwrap();
        assert_eq!(w.samples(), &[0.75, -0.125]);
    }

    #[test]
    fn write_clamps_full_scale_and_rejects_nan() {
        let w = Waveform::from_trusted(vec![1.0, -1.0, 2.0], 16_000);
        let bytes = encode_wav(&w);
        let codes: Vec<i16> = bytes[44..]
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(codes, vec![32767, -32768, 32767]);

        let dir = tempfile::tempdir().unwrap();
        let nan = Waveform {
            samples: vec![0.0, f64::NAN],
            sample_rate: 16_000,
        };
        assert!(matches!(
            write_wav(dir.path().join("nan.wav"), &nan),
            Err(Error::Validation(_))
        ));
        assert!(Waveform::new(vec![f64::INFINITY], 16_000).is_err());
    }

    #[test]
    fn write_then_read_small_example() {
        let w = Waveform::new(vec![0.0, 0.5], 16_000).unwrap();
        let back = decode_wav(&encode_wav(&w)).unwrap();
        for (a, b) in w.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let w = Waveform::new(vec![0.0], 16_000).unwrap();
        let err = write_wav("/nonexistent-dir/x/y.wav", &w).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    proptest! {
        #[test]
        fn roundtrip_within_quantization(samples in prop::collection::vec(-1.0f64..=1.0, 1..512)) {
            let w = Waveform::new(samples, 16_000).unwrap();
            let back = decode_wav(&encode_wav(&w)).unwrap();
            prop_assert_eq!(back.len(), w.len());
            for (a, b) in w.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
        }
    }
}
