//! Error type shared across the solver stack.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation before any computation started.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Adaptive quadrature ran out of budget before reaching the requested
    /// tolerance; carries the residual it did achieve.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// A pivot vanished while factorizing a tridiagonal system.
    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    /// A trajectory exceeded the overflow guard.
    #[error("trajectory diverged at step {step}, node {node}: |u| = {value:.3e}")]
    Divergence { step: usize, node: usize, value: f64 },

    /// The negative part of the embedding spectrum exceeded the hard limit.
    #[error("circulant embedding rejected: rho_minus = {rho_minus:.3e} exceeds limit {limit:.3e}")]
    EmbeddingRejected { rho_minus: f64, limit: f64 },

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
