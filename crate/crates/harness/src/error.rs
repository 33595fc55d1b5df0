use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// The plan or batch configuration is unusable as given.
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Core(#[from] swtest_core::Error),
    #[error("cannot parse plan file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn plan_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Plan(msg.into())
}
