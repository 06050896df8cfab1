use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::format::FormatError;
use crate::tokenize::InvalidUtf8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Utf8(#[from] InvalidUtf8),
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("divergence in {task}: {detail}")]
    Divergence { task: String, detail: String },
    #[error(transparent)]
    Engine(#[from] gtadoc_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use gtadoc_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Engine(E::Usage(_)) => 1,
            CliError::Io { .. } | CliError::Utf8(_) => 2,
            CliError::Engine(E::Capacity { .. } | E::Overflow | E::Resource(_)) => 2,
            CliError::Format { .. } | CliError::Engine(E::Corruption(_)) => 3,
            CliError::Divergence { .. } => 4,
        }
    }
}
