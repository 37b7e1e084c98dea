use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("argument {x} outside the domain of {function}")]
    Domain { function: &'static str, x: f64 },

    #[error("no sign change found after {expansions} bracket expansions")]
    NoBracket { expansions: usize },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
