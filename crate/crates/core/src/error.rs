use thiserror::Error;

use crate::sdp::SdpSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {what} = {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("synchronicity violation: input {input} allows distinct outputs ({a}, {b})")]
    SynchronicityViolation { input: usize, a: usize, b: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size must be positive: {0}")]
    EmptyDimension(&'static str),

    #[error("density is not normalized: weights sum to {0}")]
    DensityNotNormalized(String),

    #[error("density has a negative weight at ({x}, {y})")]
    NegativeDensity { x: usize, y: usize },

    #[error("invalid correlation: {0}")]
    InvalidCorrelation(String),

    #[error("enumeration too large: {count} strategies exceed the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("t = {0} is not in the feasible list {{0, 1, 2, 3, 3/2}}")]
    InfeasibleT(String),

    #[error("relaxation level {0} is not supported (use 1 or 2)")]
    InvalidLevel(usize),

    #[error("SDP solver did not converge after {} iterations (primal {:.3e}, dual {:.3e})",
        .0.iterations, .0.primal_residual, .0.dual_residual)]
    NotConverged(Box<SdpSolution>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn check_index(what: &'static str, index: usize, limit: usize) -> Result<()> {
        if index < limit {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { what, index, limit })
        }
    }
}
