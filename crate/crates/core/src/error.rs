use thiserror::Error;

/// Errors raised by the evaluators.
///
/// Series that run out of terms are not errors at this level: they come back
/// as an [`EvalResult`](crate::special::EvalResult) with `converged == false`
/// and can be promoted with
/// [`EvalResult::require_converged`](crate::special::EvalResult::require_converged).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid control settings: {0}")]
    InvalidControl(String),

    #[error(
        "not converged after {terms_used} terms (value {value:e}, last increment {est_error:e})"
    )]
    NotConverged {
        value: f64,
        terms_used: usize,
        est_error: f64,
    },

    #[error("quadrature exceeded maximum depth {max_depth}")]
    MaxDepthExceeded { max_depth: usize },

    #[error("unsupported report format: {0}")]
    UnsupportedFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
