use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("undefined bound: {0}")]
    UndefinedBound(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::InvalidInput(_) => "invalid-input",
            LabError::Precondition(_) => "precondition",
            LabError::NumericalFailure(_) => "numerical-failure",
            LabError::UndefinedBound(_) => "undefined-bound",
            LabError::Parse(_) => "parse",
            LabError::Io(_) => "io",
        }
    }

    /// Message without the category prefix.
    pub fn detail(&self) -> String {
        match self {
            LabError::InvalidInput(m)
            | LabError::Precondition(m)
            | LabError::NumericalFailure(m)
            | LabError::UndefinedBound(m)
            | LabError::Parse(m) => m.clone(),
            LabError::Io(e) => e.to_string(),
        }
    }

    /// Process exit status for this error: 2 for bad input, 1 for failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::NumericalFailure(_) | LabError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Parse(e.to_string())
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
