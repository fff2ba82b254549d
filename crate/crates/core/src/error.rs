use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: size {got} exceeds the supported maximum {max}")]
    TooLarge {
        what: &'static str,
        got: usize,
        max: usize,
    },

    #[error("{what}: size {got} is below the supported minimum {min}")]
    TooSmall {
        what: &'static str,
        got: usize,
        min: usize,
    },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("cut j = {j} out of range for n = {n} (need 1 <= j <= n - 1)")]
    Cut { j: usize, n: usize },

    #[error("site count mismatch: operator has {operator} sites, state has {state}")]
    SiteMismatch { operator: usize, state: usize },

    #[error("{0}")]
    Domain(String),

    #[error("malformed gate layer: {0}")]
    MalformedLayer(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{routine} did not converge on a {rows}x{cols} matrix")]
    NoConvergence {
        routine: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("malformed tensor-network file: {0}")]
    Format(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
