use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed wav: {0}")]
    Format(String),

    #[error("unsupported wav layout: {0}")]
    UnsupportedLayout(String),

    #[error("corrupt wav file: {0}")]
    Corrupt(String),

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("unknown label `{0}`")]
    Label(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("insufficient material: {0}")]
    InsufficientMaterial(String),

    #[error("input too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric fault in {block}")]
    NumericFault { block: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("epoch {epoch} outside the schedule domain [0, {total})")]
    ScheduleDomain { epoch: usize, total: usize },

    #[error("index error: {0}")]
    Index(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("training aborted at epoch {epoch}, batch {batch}: {source}")]
    Training {
        epoch: usize,
        batch: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the root cause is a non-finite value in the numeric path.
    pub fn is_numeric_fault(&self) -> bool {
        match self {
            Error::NumericFault { .. } => true,
            Error::Training { source, .. } => source.is_numeric_fault(),
            _ => false,
        }
    }
}
