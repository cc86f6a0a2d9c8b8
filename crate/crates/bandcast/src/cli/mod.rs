//! Command-line surface: synthetic-signal generation, fitting with forecast
//! emission, streaming filtering, and Gram-spectrum diagnostics.
//!
//! Exit codes: 0 success, 2 input/parse/config error, 3 solver failure,
//! 4 I/O error.

mod args;
mod commands;
mod csvio;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::error::Error;

pub use args::{Cli, Command};

/// Errors surfaced by the CLI with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag/config combination or invalid parameter values.
    Config(String),
    /// Malformed input file content.
    Parse { line: usize, message: String },
    /// Input times are not consecutive integers.
    Gap { expected: i64, got: i64 },
    /// The linear solve failed.
    Solver(Error),
    /// Filesystem failure.
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Gap { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            CliError::Gap { expected, got } => {
                write!(
                    f,
                    "non-consecutive times: expected t = {expected}, got t = {got}"
                )
            }
            CliError::Solver(e) => write!(f, "solver failure: {e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPositiveDefinite { .. } | Error::SingularSystem { .. } => CliError::Solver(e),
            Error::NonConsecutiveTime { expected, got } => CliError::Gap { expected, got },
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the selected command,
/// returning the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bandcast: {e}");
            e.exit_code()
        }
    }
}
