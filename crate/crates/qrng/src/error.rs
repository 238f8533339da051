use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors surfaced by the command-line tools. Each maps to a process exit
/// code through [`AppError::exit_code`].
#[derive(Debug, Error)]
pub enum AppError {
    /// Bad input: malformed files, out-of-range parameters, missing settings.
    #[error("{0}")]
    Validation(String),
    /// Well-formed input that breaks a contract, e.g. asking an extractor
    /// for more bits than the certified budget.
    #[error("{0}")]
    Contract(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Unexpected(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Contract(_) => 3,
            AppError::Io { .. } | AppError::Unexpected(_) => 1,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        AppError::Validation(msg.into())
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Prefixes a validation message with the field or file it concerns.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            AppError::Validation(m) => AppError::Validation(format!("{what}: {m}")),
            AppError::Contract(m) => AppError::Contract(format!("{what}: {m}")),
            other => other,
        }
    }
}

impl From<qrng_core::Error> for AppError {
    fn from(e: qrng_core::Error) -> Self {
        use qrng_core::Error as E;
        match e {
            E::BudgetExceeded { .. } => AppError::Contract(e.to_string()),
            E::NoConvergence(_) => AppError::Unexpected(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
