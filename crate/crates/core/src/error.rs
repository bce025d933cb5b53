use thiserror::Error;

use crate::model::Boundary;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("beta must be finite and positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("wall separation L must be finite and positive, got {0}")]
    NonPositiveL(f64),
    #[error("operation requires {expected} walls, got {got}")]
    WrongMode { expected: Boundary, got: Boundary },
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("theta: Im(tau) must be positive, got {0}")]
    TauNotInUpperHalfPlane(f64),
    #[error("theta series did not converge within {0} terms")]
    NonConvergence(usize),

    #[error("quadrature did not reach tolerance: estimate {value}, error {error}")]
    ToleranceNotReached { value: f64, error: f64 },
    #[error("integrand returned a non-finite value at u = {0}")]
    NonFiniteIntegrand(f64),
    #[error("bessel K0 requires a positive argument, got {0}")]
    NonPositiveArgument(f64),

    #[error("linear system is singular")]
    SingularSystem,
    #[error("iterative solver stopped after {iterations} iterations at residual {residual:e}")]
    IterationLimitExceeded { iterations: usize, residual: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("invalid lattice geometry: {0}")]
    InvalidGeometry(String),
    #[error("event cap of {0} exceeded")]
    Overflow(u64),
    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("force underflow at L = {0}")]
    ForceUnderflow(f64),
}
