use thiserror::Error;

pub type Result<T> = std::result::Result<T, CbfError>;

#[derive(Debug, Error)]
pub enum CbfError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid mismatch: {left}^3 vs {right}^3")]
    GridMismatch { left: usize, right: usize },

    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    #[error("spectral tail unresolved at t = {t} (tail fraction {fraction:e})")]
    Unresolved { t: f64, fraction: f64 },

    #[error("diagnostics do not cover the interval: {0}")]
    Coverage(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CbfError {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            CbfError::Config(_) | CbfError::InvalidArgument(_) | CbfError::GridMismatch { .. } => 2,
            CbfError::BlowUp { .. } => 3,
            CbfError::Unresolved { .. } => 4,
            CbfError::Io(_) | CbfError::Checkpoint(_) | CbfError::Json(_) => 5,
            CbfError::Coverage(_) | CbfError::CheckFailed(_) => 1,
        }
    }
}
