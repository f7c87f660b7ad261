use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure categories, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Runtime(ns_manifold::Error),
    #[error("I/O error at {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<ns_manifold::Error> for CliError {
    fn from(e: ns_manifold::Error) -> Self {
        match e {
            ns_manifold::Error::InvalidConfig { field, message } => CliError::Config { field, message },
            other => CliError::Runtime(other),
        }
    }
}
