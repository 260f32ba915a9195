use std::io;

use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid input.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for numerical non-convergence.
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] hgmrf_core::Error),
    #[error("{0}")]
    NotConverged(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hgmrf_core::Error as E;
        match self {
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::Model(E::NotConverged { .. } | E::RootNotFound(_) | E::NonFinite { .. }) => {
                EXIT_NOT_CONVERGED
            }
            _ => EXIT_VALIDATION,
        }
    }
}
