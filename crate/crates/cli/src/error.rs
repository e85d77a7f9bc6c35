//! CLI error type with the exit-code contract: 0 success, 2 validation,
//! 3 I/O, 4 domain.

use pvtag_core::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad scenario file, bad CSV, bad parameters.
    #[error("{0}")]
    Validation(String),

    /// Filesystem trouble.
    #[error("{0}")]
    Io(String),

    /// A model operation rejected its inputs.
    #[error("{0}")]
    Domain(#[from] ModelError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Domain(_) => 4,
        }
    }
}

/// Attach a scenario-file key path to a model error, turning it into a
/// validation failure that names the offending key.
pub fn key_context<T>(result: Result<T, ModelError>, key: &str) -> Result<T, CliError> {
    result.map_err(|e| CliError::Validation(format!("{key}: {e}")))
}
