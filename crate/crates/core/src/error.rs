use thiserror::Error;

/// Errors raised by the carpet library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarpetError {
    #[error("invalid map {index}: {reason}")]
    InvalidMap { index: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("operation requires a {expected} carpet, got {found}")]
    WrongKind { expected: &'static str, found: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("optimizer failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("value {value} outside domain {domain}")]
    DomainError { value: f64, domain: String },

    #[error("unsupported sequence: {0}")]
    UnsupportedSpec(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u64,
        budget: u64,
    },

    #[error("enumeration too large: {count} tuples exceeds cap {cap}")]
    TooLarge { count: u64, cap: u64 },

    #[error("target {alpha} outside [{lo}, {hi}]")]
    OutOfRange { alpha: f64, lo: f64, hi: f64 },

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("parse error: {0}")]
    Parse(String),
}

impl CarpetError {
    /// True for errors caused by malformed or out-of-contract input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            CarpetError::InvalidMap { .. }
                | CarpetError::Invalid(_)
                | CarpetError::WrongKind { .. }
                | CarpetError::Degenerate(_)
                | CarpetError::DomainError { .. }
                | CarpetError::UnsupportedSpec(_)
                | CarpetError::OutOfRange { .. }
                | CarpetError::EmptyCloud
                | CarpetError::Parse(_)
        )
    }

    /// True for errors caused by an enumeration budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, CarpetError::Budget { .. } | CarpetError::TooLarge { .. })
    }
}

pub type Result<T, E = CarpetError> = std::result::Result<T, E>;
