use thiserror::Error;

/// Errors raised by model construction and the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sector: 2j = {twice_j} is incompatible with N = {n_satellites} satellites")]
    InvalidSector { n_satellites: usize, twice_j: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("branch ambiguity: eigenphase {phase} lies within {tol:e} of pi")]
    BranchAmbiguity { phase: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
