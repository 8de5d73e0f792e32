use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("malformed rational {0:?}, expected \"num/den\"")]
    ParseRational(String),

    #[error("horizon {horizon} exceeds the cap of {cap}")]
    HorizonCap { horizon: u64, cap: u64 },

    #[error("path enumeration exceeded its budget of {limit} atoms")]
    EnumerationBudget { limit: u64 },

    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: u32, right: u32 },

    #[error("crossing budget {budget} insufficient: tail mass {tail} is not below {eps}")]
    BudgetInsufficient {
        budget: u64,
        tail: String,
        eps: String,
    },

    #[error("invalid probability sequence: {0}")]
    InvalidProbSeq(String),

    #[error("invalid tolerance rule: {0}")]
    InvalidEpsRule(String),

    #[error("schedule cap reached: only {fitted} of {requested} scheduled times fit ({reason})")]
    ScheduleCap {
        fitted: usize,
        requested: usize,
        reason: String,
    },

    #[error("invalid kernel spec: {0}")]
    KernelSpec(String),

    #[error("insufficient data: {observed} conditioning observations, need {required}")]
    InsufficientData { observed: u64, required: u64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
