use bnlab_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialisation error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const ASSERTION: i32 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => exit::CONFIG,
            Self::Lab(e) => match e {
                LabError::InvalidParameter(_)
                | LabError::Dimension(_)
                | LabError::Scale(_)
                | LabError::Geometry(_)
                | LabError::NotPositiveDefinite(_) => exit::CONFIG,
                LabError::Witness { .. } => exit::ASSERTION,
                LabError::Convergence(_)
                | LabError::NonIntegrable(_)
                | LabError::Quadrature(_)
                | LabError::Fit(_)
                | LabError::Blowup { .. } => exit::NUMERICAL,
            },
            Self::Json(_) | Self::Csv(_) | Self::Pool(_) => exit::NUMERICAL,
        }
    }
}
