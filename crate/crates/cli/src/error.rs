use std::io;
use std::path::Path;

use thiserror::Error;

/// Failures that end a run with exit status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] rctm::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }
}
