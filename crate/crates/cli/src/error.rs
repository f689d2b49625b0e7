use std::fmt::Display;
use std::path::Path;

use thiserror::Error;

/// Failures reported by the executable. The variant fixes the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, bad arguments or configuration.
    #[error("{0}")]
    Input(String),
    /// Well-formed input that breaks an operation's contract.
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    pub fn input(msg: impl Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn contract(msg: impl Display) -> Self {
        CliError::Contract(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Contract(_) => 2,
        }
    }

    /// Prefixes the message, keeping the exit code.
    pub fn context(self, prefix: impl Display) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{prefix}: {m}")),
            CliError::Contract(m) => CliError::Contract(format!("{prefix}: {m}")),
        }
    }
}

pub fn io_error(path: &Path, err: std::io::Error) -> CliError {
    CliError::input(format!("{}: {err}", path.display()))
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
