use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{op}: vector length {got} does not match expected {expected}")]
    LengthMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("matrix is not symmetric (max deviation {max_deviation:.3e})")]
    NotSymmetric { max_deviation: f64 },

    #[error("matrix is not positive definite (pivot {pivot} evaluated to {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {last_estimate:.6e})")]
    NoConvergence {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("optimizer diverged at iteration {iteration} (iterate norm {norm:.3e} before the step)")]
    Diverged { iteration: usize, norm: f64 },

    #[error("cannot normalize a zero vector")]
    ZeroNorm,

    #[error("X^T y has a zero component at index {index}; fixed point undefined")]
    ZeroGradientComponent { index: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
