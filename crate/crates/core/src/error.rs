use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors returned by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} is outside its domain (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("matrix is singular or rank deficient: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("target {target} is outside the bracket image [{lo}, {hi}]")]
    Bracket { target: f64, lo: f64, hi: f64 },

    #[error("solver failure: {0}")]
    Solver(#[from] SolverError),
}

/// Failure modes of the convex solvers.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no strictly feasible starting point")]
    NoInterior,

    #[error("problem appears unbounded")]
    Unbounded,

    #[error("no convergence after {iterations} iterations (gap {gap:e}, newton decrement {decrement:e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        decrement: f64,
    },

    #[error("relaxed solution has rank indicator {ratio:e}, expected rank one")]
    UnexpectedRank { ratio: f64 },

    #[error("inner GP solve failed at iterate {iterate:?}: {reason}")]
    GpInner { iterate: Vec<f64>, reason: String },
}
