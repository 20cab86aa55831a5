//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by series evaluators, lattice sums and verifiers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation requested at (or numerically indistinguishable from) a pole.
    #[error("pole: {0}")]
    Pole(String),

    /// A series or lattice tail failed the decay criterion within the term
    /// budget. For bilateral lattice sums this signals that the integrand is
    /// not absolutely q-integrable.
    #[error("tail not converged: {0}")]
    TailNotConverged(String),

    /// Argument outside the convergence radius of a series with finite radius.
    #[error("outside convergence radius: {0}")]
    Radius(String),

    /// q-Bessel-Macdonald functions are defined here for noninteger order only.
    #[error("integer order: {0}")]
    IntegerOrder(String),
}

pub type Result<T> = std::result::Result<T, Error>;
