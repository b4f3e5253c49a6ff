use thiserror::Error;

/// Errors raised by the relay-selection and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no zero-forcing direction exists: null space of a {rows}x{cols} matrix of rank {rank} is empty")]
    NoNullSpace { rows: usize, cols: usize, rank: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is singular")]
    Singular,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate relay index {0} in selection")]
    DuplicateIndex(usize),

    #[error("relay index {index} out of range for {count} relays")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("harvesting requirement of relay {relay} cannot be met: needs {required:.6} W, at most {available:.6} W available")]
    HarvestInfeasible {
        relay: usize,
        required: f64,
        available: f64,
    },

    #[error("source power update is infeasible (leakage cap conflicts with harvesting requirements)")]
    PowerInfeasible,

    #[error("conic solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
