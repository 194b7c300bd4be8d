//! Error types shared across the crate.

/// Errors produced by fallible operations.
///
/// Programmer contract violations (mismatched lengths handed to hot-path
/// evaluation routines) panic instead; see the individual function docs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Sobol generator asked for a dimension outside the supported table.
    #[error("unsupported Sobol dimension {dim}, supported range is 1..={max}")]
    UnsupportedDimension { dim: usize, max: usize },

    /// Gauss-Legendre order outside the supported range.
    #[error("unsupported Gauss-Legendre order {order}, supported range is 1..={max}")]
    UnsupportedOrder { order: usize, max: usize },

    /// Inconsistent run configuration (caught before any compute).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical evaluation produced a non-finite value.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
