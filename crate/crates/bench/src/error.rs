use std::io;
use std::path::PathBuf;

/// Failures of the experiment harness. Configuration problems are kept apart
/// from runtime failures so the CLI can report them with distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] io::Error),
    #[error(transparent)]
    Core(#[from] dpsub_core::Error),
    #[error("{0}")]
    Runtime(String),
}

impl BenchError {
    pub fn is_config(&self) -> bool {
        matches!(self, BenchError::Config(_) | BenchError::Parse { .. })
    }
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;

pub(crate) fn config(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}
