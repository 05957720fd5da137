use thiserror::Error;

/// Process exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Bad input, bad flags, missing files.
pub const EXIT_USAGE: i32 = 2;
/// A non-finite value appeared while computing.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] kws_core::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric_fault() => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
