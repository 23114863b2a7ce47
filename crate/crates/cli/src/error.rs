use std::path::PathBuf;

use crate::config::ConfigError;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_MODEL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] backaction::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Failure at one point of a parameter sweep.
    #[error("{key} = {value}: {source}")]
    SweepPoint {
        key: String,
        value: String,
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigFile { .. } | CliError::Config(_) | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Model(e) if e.is_model_failure() => EXIT_MODEL,
            CliError::Model(backaction::Error::Io { .. }) => EXIT_IO,
            // Domain and grid errors stem from configured values.
            CliError::Model(_) => EXIT_CONFIG,
            CliError::SweepPoint { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
