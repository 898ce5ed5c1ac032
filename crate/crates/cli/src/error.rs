use std::path::PathBuf;

use thiserror::Error;
use toporeg_core::TopoError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0}")]
    Numeric(String),

    #[error("diverged at step {step}: {message}")]
    Divergence { step: usize, message: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 usage, 2 I/O or format, 3 numeric or domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Format { .. } | CliError::Shape(_) => 2,
            CliError::Numeric(_) | CliError::Divergence { .. } => 3,
        }
    }
}

impl From<TopoError> for CliError {
    fn from(e: TopoError) -> Self {
        match e {
            TopoError::DimensionMismatch { .. } => CliError::Shape(e.to_string()),
            TopoError::InvalidShape { .. } => CliError::Shape(e.to_string()),
            TopoError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
