use thiserror::Error;

use paradiff_core::LabError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] LabError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("anchors without an executed check: {0:?}")]
    Coverage(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type RunResult<T> = std::result::Result<T, RunError>;
