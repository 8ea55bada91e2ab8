use thiserror::Error;

/// Errors raised by the geometry, discretization and reporting layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad input: unsupported kind, out-of-range parameter, unknown config key.
    #[error("configuration error: {0}")]
    Config(String),

    /// A type invariant (positive warp, positive density, ...) does not hold.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// An eigensolver ran out of iterations.
    #[error("solver failed to converge: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },

    /// A discrete result contradicts a structural fact of the continuous problem,
    /// e.g. the bottom of a Laplace spectrum is not zero.
    #[error("discretization fault: {0}")]
    Discretization(String),

    /// A caller-supplied test function or input violates a precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
