use crate::cones::ConeError;
use crate::linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown built-in problem `{0}`")]
    UnknownProblem(String),
    #[error("inner solver failed after {iterations} iterations (gradient norm {grad_norm:e})")]
    InnerFailure { iterations: usize, grad_norm: f64 },
    #[error("point is infeasible (violation {violation:e})")]
    Infeasible { violation: f64 },
    #[error("insufficient usable points for rate estimation ({usable} usable, {required} required)")]
    InsufficientPoints { usable: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
