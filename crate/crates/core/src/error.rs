//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid problem specification: {0}")]
    Spec(String),
    #[error("generators do not span a Lie subalgebra: {0}")]
    NotSubalgebra(String),
    #[error("Lie closure did not terminate after {0} rounds")]
    ClosureNotConverged(usize),
    #[error("optimizer did not converge: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
