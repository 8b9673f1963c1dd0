use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radix {0}: must be at least 2")]
    InvalidRadix(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("dominant eigenvalue not certified (|lambda_2| / rho = {gap})")]
    DominanceNotCertified { gap: f64 },

    #[error("matrix is not primitive: no power up to {checked} is strictly positive")]
    ReducibleMatrix { checked: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("block sum at level {level} is zero")]
    DegenerateBlock { level: u32 },

    #[error("ghost distribution of component {component} has a zero denominator")]
    DegenerateComponent { component: usize },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error reports a failed mathematical hypothesis rather than bad input.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::DominanceNotCertified { .. }
                | Error::ReducibleMatrix { .. }
                | Error::HypothesisViolated(_)
                | Error::DegenerateBlock { .. }
                | Error::DegenerateComponent { .. }
        )
    }
}
