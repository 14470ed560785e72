use etop_core::engine::EngineError;
use etop_core::steps::StepError;
use etop_core::tabular::TabularError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NO_WINNER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("no winner: {0}")]
    NoWinner(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => EXIT_USAGE,
            HarnessError::Data(_) | HarnessError::Write { .. } => EXIT_DATA,
            HarnessError::NoWinner(_) => EXIT_NO_WINNER,
        }
    }
}

impl From<TabularError> for HarnessError {
    fn from(e: TabularError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<StepError> for HarnessError {
    fn from(e: StepError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<EngineError> for HarnessError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidFraction(_) | EngineError::InvalidConfig(_) => HarnessError::Usage(e.to_string()),
            EngineError::Step(StepError::InvalidSurrogate) => HarnessError::Usage(e.to_string()),
            _ => HarnessError::Data(e.to_string()),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
