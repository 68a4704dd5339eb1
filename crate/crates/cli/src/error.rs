use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::VerifyFailed(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<bbcool::Error> for CliError {
    fn from(e: bbcool::Error) -> Self {
        use bbcool::Error::*;
        match e {
            InvalidBounds { .. } | InvalidTarget(_) | InvalidStep(_) | Precondition(_) | InvalidSchedule(_)
            | NotAnchorable => CliError::Usage(e.to_string()),
            _ => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("invalid JSON: {e}"))
    }
}
