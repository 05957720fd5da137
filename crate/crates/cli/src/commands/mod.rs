pub mod eval;
pub mod infer;
pub mod inspect;
pub mod prepare;
pub mod sweep;
pub mod train;

use std::io::Write;

use crate::error::{CliError, CliResult};

/// Writes one line of command output.
pub(crate) fn say(out: &mut dyn Write, line: impl AsRef<str>) -> CliResult {
    writeln!(out, "{}", line.as_ref()).map_err(|e| CliError::usage(format!("cannot write output: {e}")))
}
