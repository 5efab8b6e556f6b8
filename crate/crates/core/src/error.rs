use thiserror::Error;

/// Errors raised by class construction, compression, and reconstruction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid concept class: {0}")]
    InvalidClass(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("label space mismatch: {0}")]
    LabelMismatch(String),
    #[error("empty sample")]
    EmptySample,
    #[error("empty concept class")]
    EmptyClass,
    #[error("sample is not realizable by the class")]
    Unrealizable,
    #[error("no compression within budget {0}")]
    BudgetExceeded(usize),
    #[error("scheme failure: {0}")]
    SchemeFailure(String),
    #[error("malformed compression bits: {0}")]
    Decode(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
