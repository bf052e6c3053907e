use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("condition not met: {0}")]
    ConditionNotMet(String),

    #[error("recursion inapplicable at relay {relay}: degenerate pivot with residual {residual}")]
    RecursionInapplicable { relay: usize, residual: String },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("capacity exceeded: n = {n} is above the limit of {limit} for this computation")]
    CapacityExceeded { n: usize, limit: usize },

    #[error("simplex failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
