use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input or an object violating a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    /// A comparison could not be decided from the coordinates inside the horizon.
    #[error("indeterminate at horizon {horizon}: {message}")]
    Indeterminate { horizon: usize, message: String },

    /// The hypotheses of a requested operation do not hold.
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    /// A claimed property failed on a concrete witness.
    #[error("property violation: {0}")]
    Violation(String),

    #[error("step budget of {0} exhausted")]
    Budget(usize),

    /// Two routes to the same quantity disagreed.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } | Error::Unknown { .. } => 1,
            Error::Indeterminate { .. } => 2,
            Error::Hypothesis(_) => 3,
            Error::Violation(_) | Error::Inconsistent(_) | Error::Budget(_) => 4,
        }
    }
}
