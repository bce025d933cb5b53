//! Shared parameter types for every part of the laboratory.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Behaviour of the two walls at `0` and `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Reflecting,
    Absorbing,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Reflecting => f.write_str("reflecting"),
            Boundary::Absorbing => f.write_str("absorbing"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reflecting" | "r" => Ok(Boundary::Reflecting),
            "absorbing" | "a" => Ok(Boundary::Absorbing),
            other => Err(Error::InvalidInput(format!("unknown boundary mode `{other}`"))),
        }
    }
}

/// Immigration intensity `beta`, wall separation `length` and wall behaviour.
///
/// Construct through [`ModelParams::new`] or run [`validate`] on a literal;
/// all numerical routines assume the invariants hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub boundary: Boundary,
}

impl ModelParams {
    pub fn new(beta: f64, length: f64, boundary: Boundary) -> Result<Self> {
        validate(ModelParams {
            beta,
            length,
            boundary,
        })
    }

    pub fn reflecting(beta: f64, length: f64) -> Result<Self> {
        Self::new(beta, length, Boundary::Reflecting)
    }

    pub fn absorbing(beta: f64, length: f64) -> Result<Self> {
        Self::new(beta, length, Boundary::Absorbing)
    }

    /// Inverse correlation length of the single-interval parity, `sqrt(2 beta)`.
    pub fn kappa_reflecting(&self) -> f64 {
        (2.0 * self.beta).sqrt()
    }

    /// Decay rate of the absorbing force, `sqrt(8 beta)`.
    pub fn kappa_absorbing(&self) -> f64 {
        (8.0 * self.beta).sqrt()
    }

    /// Steady-state bulk density far from any wall, `sqrt(beta / 2)`.
    pub fn bulk_density(&self) -> f64 {
        (self.beta / 2.0).sqrt()
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.beta, length, self.boundary)
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        ModelParams { boundary, ..*self }
    }
}

/// Returns the parameters unchanged iff `beta` and `L` are finite and positive.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    if !(params.beta.is_finite() && params.beta > 0.0) {
        return Err(Error::NonPositiveBeta(params.beta));
    }
    if !(params.length.is_finite() && params.length > 0.0) {
        return Err(Error::NonPositiveL(params.length));
    }
    Ok(params)
}

/// How a force value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    PdeOracle,
    Simulation,
    FluxLimit,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::ClosedForm => "closed-form",
            Method::PdeOracle => "pde-oracle",
            Method::Simulation => "simulation",
            Method::FluxLimit => "flux-limit",
        };
        f.write_str(s)
    }
}

/// Expected Casimir force on the wall at `0`; positive values mean attraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    pub value: f64,
    pub mode: Boundary,
    pub method: Method,
    pub uncertainty: Option<f64>,
}
