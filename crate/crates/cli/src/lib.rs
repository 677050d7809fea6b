pub mod commands;
pub mod config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] nung_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Core(e) => match e {
                nung_core::Error::EmptyReport(_) | nung_core::Error::Io(_) => 2,
                _ => 1,
            },
            CliError::Io(_) | CliError::Json(_) => 2,
        }
    }
}
