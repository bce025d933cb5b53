//! Numerical laboratory for the stochastic Casimir effect in annihilating
//! Brownian motions with pairwise immigration between two walls.
//!
//! The crate provides closed-form forces and densities, finite-difference
//! oracles for the underlying boundary-value problems, a lattice Monte Carlo
//! simulator and large-separation asymptotics.

pub mod asymptotics;
pub mod closed_form;
pub mod error;
pub mod lattice_sim;
pub mod model;
pub mod pde_oracle;
pub mod quadrature;
pub mod special_fn;

pub use error::{Error, Result};
pub use model::{validate, Boundary, ForceResult, Method, ModelParams};
