use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("inner solver did not converge after {iterations} iterations (projected gradient norm {grad_norm:e})")]
    Convergence { iterations: usize, grad_norm: f64 },

    #[error("insufficient data: need at least {needed} samples, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error(
        "schedule infeasible: block size {block_size:.3e} exceeds n = {n}; \
         rerun with constant_scale <= {max_constant_scale:.3e}"
    )]
    ScheduleInfeasible { n: usize, block_size: f64, max_constant_scale: f64 },

    #[error("inconclusive audit: {0}")]
    Inconclusive(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
