use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// Everything that can stop a run, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The machine-readable form printed on stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport<'a> {
    pub category: &'a str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn report(&self) -> ErrorReport<'_> {
        ErrorReport {
            category: self.category(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }

    /// Prefixes the message with where it happened (a sweep point, a key).
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{what}: {m}")),
            io => io,
        }
    }
}

impl From<spinerase::Error> for CliError {
    fn from(e: spinerase::Error) -> Self {
        use spinerase::Error as E;
        match e {
            E::NoConvergence(_) | E::Divergence(_) | E::NonTermination { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
