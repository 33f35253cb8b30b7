use std::fmt;
use std::path::Path;

use fluxonium::Error;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable schema, out-of-domain parameters. Exit 2.
    Config(String),
    /// A solver failed; diagnostics are written next to the output. Exit 3.
    Numerical { message: String, diagnostics: serde_json::Value },
    /// Files could not be read or written. Exit 4.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn numerical(message: impl Into<String>, diagnostics: serde_json::Value) -> Self {
        CliError::Numerical { message: message.into(), diagnostics }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical { message, .. } => write!(f, "numerical failure: {message}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Domain(_) | Error::Schema(_) | Error::Plan(_) | Error::Fit(_) | Error::DimensionCap { .. } | Error::StepSize { .. } => {
                CliError::Config(e.to_string())
            }
            Error::Numerical(_) | Error::Convergence(_) | Error::Resonant => {
                CliError::numerical(e.to_string(), serde_json::json!({ "error": e.to_string() }))
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
