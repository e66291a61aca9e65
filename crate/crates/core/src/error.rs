//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by construction, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or grid parameters.
    #[error("config error: {0}")]
    Config(String),

    /// A structural hypothesis required by the theory fails numerically.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// Inputs violate an API contract (e.g. mismatched grids).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The Nehari projection is undefined (zero nonlinear mass).
    #[error("projection undefined: {0}")]
    ProjectionUndefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
