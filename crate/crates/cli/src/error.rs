use std::fmt;

use pat_core::PatError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVARIANT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<PatError> for CliError {
    fn from(e: PatError) -> Self {
        let code = match &e {
            PatError::Io(_) | PatError::Format(_) => EXIT_IO,
            PatError::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
