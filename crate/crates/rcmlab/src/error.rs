use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] rcm_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for configuration and precondition errors, 3 for numerical backend
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use rcm_core::Error as E;
        match self {
            LabError::Config(_) => 2,
            LabError::Core(E::Backend(_) | E::RankDeficient(_)) => 3,
            LabError::Core(
                E::InvalidParameter(_) | E::DimensionMismatch(_) | E::NotSquare { .. } | E::BudgetExceeded { .. } | E::Parse(_),
            ) => 2,
            LabError::Core(E::Io(_)) | LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
