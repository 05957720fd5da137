//! JSON Lines dataset manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::labels::{LabelMap, NULL_LABEL};
use super::wav::{read_wav, DATASET_SAMPLE_RATE};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "dev" | "valid" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::Manifest(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Original,
    Synthetic,
    Noise,
}

/// One labeled utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub label: String,
    pub split: Split,
    pub source: Source,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display: Option<String>,
}

impl ManifestEntry {
    pub fn validate(&self, labels: &LabelMap) -> Result<()> {
        labels.index(&self.label)?;
        if self.source == Source::Synthetic && self.split != Split::Train {
            return Err(Error::Manifest(format!(
                "synthetic entry `{}` is in the {} split",
                self.id, self.split
            )));
        }
        if (self.label == NULL_LABEL) != (self.source == Source::Noise) {
            return Err(Error::Manifest(format!(
                "entry `{}`: NULL label and noise source must go together",
                self.id
            )));
        }
        if self.duration_s.is_nan() || self.duration_s <= 0.0 {
            return Err(Error::Manifest(format!("entry `{}` has no duration", self.id)));
        }
        Ok(())
    }
}

/// How command files are assigned to train / dev / test.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    /// Stratified per command directory. Dev and test take `floor(n * fraction)`
    /// files each and train takes the remainder.
    Fractions { train: f64, dev: f64, test: f64 },
    /// Explicit assignment keyed by `<label>/<file name>`.
    Explicit(BTreeMap<String, Split>),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Fractions {
            train: 0.6,
            dev: 0.2,
            test: 0.2,
        }
    }
}

impl SplitSpec {
    /// Reads `<label>/<file>,<split>` lines; blank lines and `#` comments are skipped.
    pub fn read_explicit(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, split) = line.rsplit_once(',').ok_or_else(|| {
                Error::Manifest(format!("split file line {}: expected `path,split`", lineno + 1))
            })?;
            map.insert(key.trim().to_string(), split.parse()?);
        }
        Ok(SplitSpec::Explicit(map))
    }

    fn validate(&self) -> Result<()> {
        if let SplitSpec::Fractions { train, dev, test } = *self {
            let ok = [train, dev, test].iter().all(|f| (0.0..=1.0).contains(f))
                && ((train + dev + test) - 1.0).abs() < 1e-9;
            if !ok {
                return Err(Error::Config(format!(
                    "split fractions {train}/{dev}/{test} must be in [0,1] and sum to 1"
                )));
            }
        }
        Ok(())
    }
}

/// Sizes (train, dev, test) for `n` items; dev and test round down.
pub(crate) fn split_counts(n: usize, dev: f64, test: f64) -> (usize, usize, usize) {
    let floor = |f: f64| ((n as f64 * f) + 1e-9).floor() as usize;
    let n_dev = floor(dev).min(n);
    let n_test = floor(test).min(n - n_dev);
    (n - n_dev - n_test, n_dev, n_test)
}

fn sorted_dir(path: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let entry = entry.map_err(|e| Error::io(path, e))?;
        let name = entry.file_name();
        if name.to_string_lossy().starts_with('.') {
            continue;
        }
        out.push(entry.path());
    }
    out.sort();
    Ok(out)
}

struct CommandDir {
    label: String,
    files: Vec<PathBuf>,
}

fn scan_commands(root: &Path, labels: &LabelMap) -> Result<Vec<CommandDir>> {
    let mut dirs = Vec::new();
    for path in sorted_dir(root)? {
        if !path.is_dir() {
            continue;
        }
        let label = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !labels.is_command(&label) {
            return Err(Error::Label(label));
        }
        let files: Vec<PathBuf> = sorted_dir(&path)?
            .into_iter()
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
            })
            .collect();
        if files.is_empty() {
            return Err(Error::Coverage(format!("command directory `{label}` has no wav files")));
        }
        dirs.push(CommandDir { label, files });
    }
    // order by label index, not by directory name
    dirs.sort_by_key(|d| labels.index_of(&d.label));
    Ok(dirs)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn entry_for(
    path: &Path,
    id: String,
    label: &str,
    split: Split,
    source: Source,
    labels: &LabelMap,
) -> Result<ManifestEntry> {
    let wav = read_wav(path)?;
    wav.ensure_rate(DATASET_SAMPLE_RATE)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    if wav.is_empty() {
        return Err(Error::Validation(format!("{} is empty", path.display())));
    }
    Ok(ManifestEntry {
        id,
        path: path.to_path_buf(),
        label: label.to_string(),
        split,
        source,
        duration_s: wav.duration_s(),
        display: labels.index_of(label).and_then(|i| labels.display(i)).map(str::to_string),
    })
}

/// Lists every command WAV under `dataset_root` (one directory per command)
/// and assigns splits; files under `synthetic_root` all go to train.
pub fn build_manifest(
    dataset_root: &Path,
    synthetic_root: Option<&Path>,
    split_spec: &SplitSpec,
    seed: u64,
    labels: &LabelMap,
) -> Result<Vec<ManifestEntry>> {
    split_spec.validate()?;
    let mut entries = Vec::new();

    for dir in scan_commands(dataset_root, labels)? {
        let splits: Vec<Split> = match split_spec {
            SplitSpec::Fractions { dev, test, .. } => {
                let (n_train, n_dev, n_test) = split_counts(dir.files.len(), *dev, *test);
                let mut order: Vec<usize> = (0..dir.files.len()).collect();
                order.shuffle(&mut rng::stream(seed, &format!("split/{}", dir.label), 0));
                let mut assigned = vec![Split::Train; dir.files.len()];
                for &i in &order[n_train..n_train + n_dev] {
                    assigned[i] = Split::Dev;
                }
                for &i in &order[n_train + n_dev..n_train + n_dev + n_test] {
                    assigned[i] = Split::Test;
                }
                assigned
            }
            SplitSpec::Explicit(map) => dir
                .files
                .iter()
                .map(|f| {
                    let key = format!("{}/{}", dir.label, file_name(f));
                    map.get(&key)
                        .copied()
                        .ok_or_else(|| Error::Manifest(format!("no split assigned for `{key}`")))
                })
                .collect::<Result<_>>()?,
        };
        for (file, split) in dir.files.iter().zip(splits) {
            let id = format!("{}/{}", dir.label, stem(file));
            entries.push(entry_for(file, id, &dir.label, split, Source::Original, labels)?);
        }
    }

    if let Some(root) = synthetic_root {
        entries.extend(scan_synthetic(root, labels)?);
    }
    Ok(entries)
}

/// Entries for externally generated audio laid out like the dataset; all
/// are assigned to the training split.
pub fn scan_synthetic(root: &Path, labels: &LabelMap) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for dir in scan_commands(root, labels)? {
        for file in &dir.files {
            let id = format!("synthetic/{}/{}", dir.label, stem(file));
            entries.push(entry_for(file, id, &dir.label, Split::Train, Source::Synthetic, labels)?);
        }
    }
    Ok(entries)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for entry in entries {
        let line = serde_json::to_string(entry).map_err(|e| Error::Manifest(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| Error::Manifest(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::{write_wav, Waveform};

    fn make_tree(root: &Path, labels: &[&str], per_label: usize) {
        let w = Waveform::new(vec![0.1; 1600], 16_000).unwrap();
        for label in labels {
            let dir = root.join(label);
            fs::create_dir_all(&dir).unwrap();
            for i in 0..per_label {
                write_wav(dir.join(format!("utt{i:02}.wav")), &w).unwrap();
            }
        }
    }

    #[test]
    fn split_count_rounding() {
        assert_eq!(split_counts(10, 0.2, 0.2), (6, 2, 2));
        assert_eq!(split_counts(5, 0.2, 0.2), (3, 1, 1));
        assert_eq!(split_counts(300, 0.2, 0.2), (180, 60, 60));
        assert_eq!(split_counts(100, 0.29, 0.0), (71, 29, 0));
    }

    #[test]
    fn forty_commands_ten_files() {
        let tmp = tempfile::tempdir().unwrap();
        let labels = LabelMap::standard();
        let names: Vec<&str> = crate::audio_io::COMMANDS.iter().map(|c| c.0).collect();
        make_tree(tmp.path(), &names, 10);
        let entries = build_manifest(tmp.path(), None, &SplitSpec::default(), 7, &labels).unwrap();
        assert_eq!(entries.len(), 400);
        let count = |s| entries.iter().filter(|e| e.split == s).count();
        assert_eq!((count(Split::Train), count(Split::Dev), count(Split::Test)), (240, 80, 80));
        for e in &entries {
            e.validate(&labels).unwrap();
        }

        let syn = tempfile::tempdir().unwrap();
        make_tree(syn.path(), &names, 1);
        let with_syn =
            build_manifest(tmp.path(), Some(syn.path()), &SplitSpec::default(), 7, &labels).unwrap();
        assert_eq!(with_syn.len(), 440);
        let synthetic: Vec<_> = with_syn.iter().filter(|e| e.source == Source::Synthetic).collect();
        assert_eq!(synthetic.len(), 40);
        assert!(synthetic.iter().all(|e| e.split == Split::Train));
    }

    #[test]
    fn deterministic_for_seed_and_bijective() {
        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), &["yes", "no", "up"], 7);
        let labels = LabelMap::standard();
        let a = build_manifest(tmp.path(), None, &SplitSpec::default(), 3, &labels).unwrap();
        let b = build_manifest(tmp.path(), None, &SplitSpec::default(), 3, &labels).unwrap();
        assert_eq!(a, b);
        let mut paths: Vec<_> = a.iter().map(|e| e.path.clone()).collect();
        paths.sort();
        paths.dedup();
        assert_eq!(paths.len(), 21);
    }

    #[test]
    fn unknown_and_empty_directories() {
        let labels = LabelMap::standard();
        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), &["yes", "banana"], 2);
        assert!(matches!(
            build_manifest(tmp.path(), None, &SplitSpec::default(), 0, &labels),
            Err(Error::Label(l)) if l == "banana"
        ));

        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), &["NULL"], 2);
        assert!(matches!(
            build_manifest(tmp.path(), None, &SplitSpec::default(), 0, &labels),
            Err(Error::Label(_))
        ));

        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), &["yes"], 2);
        fs::create_dir(tmp.path().join("no")).unwrap();
        assert!(matches!(
            build_manifest(tmp.path(), None, &SplitSpec::default(), 0, &labels),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn explicit_split_file() {
        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), &["yes"], 2);
        let split_path = tmp.path().join("split.csv");
        fs::write(&split_path, "# header\nyes/utt00.wav,test\nyes/utt01.wav,train\n").unwrap();
        let spec = SplitSpec::read_explicit(&split_path).unwrap();
        let labels = LabelMap::standard();
        let entries = build_manifest(tmp.path(), None, &spec, 0, &labels).unwrap();
        assert_eq!(entries[0].split, Split::Test);
        assert_eq!(entries[1].split, Split::Train);

        fs::write(&split_path, "yes/utt00.wav,test\n").unwrap();
        let spec = SplitSpec::read_explicit(&split_path).unwrap();
        assert!(build_manifest(tmp.path(), None, &spec, 0, &labels).is_err());
    }

    #[test]
    fn jsonl_roundtrip_and_keys() {
        let tmp = tempfile::tempdir().unwrap();
        make_tree(tmp.path(), &["ok"], 3);
        let labels = LabelMap::standard();
        let entries = build_manifest(tmp.path(), None, &SplitSpec::default(), 1, &labels).unwrap();
        let path = tmp.path().join("m.jsonl");
        write_manifest(&path, &entries).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), entries);

        let first = fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
        for key in ["id", "path", "label", "split", "source", "duration_s", "display"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["display"], "موافق");
    }

    #[test]
    fn entry_validation() {
        let labels = LabelMap::standard();
        let mut e = ManifestEntry {
            id: "x".into(),
            path: "x.wav".into(),
            label: "yes".into(),
            split: Split::Dev,
            source: Source::Synthetic,
            duration_s: 1.0,
            display: None,
        };
        assert!(e.validate(&labels).is_err());
        e.split = Split::Train;
        e.validate(&labels).unwrap();
        e.label = NULL_LABEL.into();
        assert!(e.validate(&labels).is_err());
        e.label = "yes".into();
        e.duration_s = 0.0;
        assert!(e.validate(&labels).is_err());
    }
}
