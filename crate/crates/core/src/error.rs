use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("shape parameter too small at vertex {vertex}: alpha - nu = {gap} must exceed 2")]
    InvalidShape { vertex: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coefficient L[{row},{col}] is nonzero but {row} is not a parent of {col}")]
    SupportViolation { row: usize, col: usize },

    #[error("cannot build a graph with {requested} edges ({reason})")]
    InfeasibleEdgeCount { requested: usize, reason: String },

    #[error("p = {p} is too large for exhaustive enumeration (max {max})")]
    TooLarge { p: usize, max: usize },

    #[error("importance weights are degenerate (effective sample size {ess:.2})")]
    DegenerateWeights { ess: f64 },

    #[error("posterior is improper: vertex {vertex} has {parents} parents with n = {n}")]
    ImproperPosterior { vertex: usize, parents: usize, n: usize },

    #[error("solver did not converge after {sweeps} sweeps (residual {residual:.3e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("candidate pool is empty")]
    EmptyPool,

    #[error("need at least {folds} rows for {folds}-fold splitting, got {rows}")]
    TooFewRows { rows: usize, folds: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures as opposed to bad input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_)
                | Error::NotConverged { .. }
                | Error::DegenerateWeights { .. }
                | Error::ImproperPosterior { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidConfig(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
