use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The exponent pair violates the admissibility range, or the requested
    /// combination has no extremal to compute.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("domain realization is empty: no cell center lies inside the domain")]
    EmptyDomain,

    #[error("function vanishes identically")]
    ZeroFunction,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field has negative values (min {0})")]
    NegativeValues(f64),

    #[error("maximum attained away from the pinned point: {0}")]
    SymmetryViolation(String),

    #[error("inconclusive classification: {0}")]
    Inconclusive(String),

    #[error("tail unresolved: {0}")]
    TailUnresolved(String),

    #[error("sweep member failed at {at}: {source}")]
    Sweep {
        at: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
