//! Error type of the benchmark front end, with the process exit-code policy
//! in one place: configuration problems exit 2, failed experiment rows exit
//! 1, success exits 0.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("log-log fit is degenerate: all errors are numerically zero")]
    DegenerateFit,

    #[error("solver error: {0}")]
    Solver(#[from] dupc_core::SolverError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{failed} of {total} experiment rows failed")]
    FailedRows { failed: usize, total: usize },
}

impl BenchError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Json(_) | BenchError::Io(_) => 2,
            BenchError::FailedRows { .. } => 1,
            BenchError::Solver(_) | BenchError::DegenerateFit => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
