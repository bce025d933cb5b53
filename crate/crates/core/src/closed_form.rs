//! Closed-form forces, densities, parities and fluxes.
//!
//! Notation: `kappa = sqrt(2 beta)`, `b = 2 L sqrt(beta) / pi`, and on the
//! inside `phi = pi x / L`. Single cosine sums are resummed with
//!
//! ```text
//! sum_{n>=1} cos(n phi) / (n^2 + a^2) = (pi / 2a) cosh(a (pi - phi)) / sinh(a pi) - 1 / (2 a^2),   0 <= phi <= 2 pi,
//! ```
//!
//! so the inside double series reduce to single sums with exponentially
//! decaying terms.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Boundary, ForceResult, Method, ModelParams};
use crate::quadrature::{bessel_k0, integrate_halfline, IntegralSpec};
use crate::special_fn::{erf, theta_imag, theta_imag_excess};

/// Relative tolerance of the force and flux quadratures.
pub const FORCE_REL_TOL: f64 = 1e-13;
const SERIES_TOL: f64 = 1e-17;
const MAX_SERIES_TERMS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Outside,
    Inside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub x: f64,
    pub rho: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub mode: Boundary,
    pub region: Region,
    pub points: Vec<DensityPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxPoint {
    pub x: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxProfile {
    pub mode: Boundary,
    pub points: Vec<FluxPoint>,
}

/// A truncated series value with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

fn require(params: &ModelParams, mode: Boundary) -> Result<()> {
    if params.boundary != mode {
        return Err(Error::WrongMode {
            expected: mode,
            got: params.boundary,
        });
    }
    Ok(())
}

fn inside(params: &ModelParams, x: f64) -> Result<()> {
    if !(x > 0.0 && x < params.length) {
        return Err(Error::OutOfDomain(format!("x = {x} must lie in (0, {})", params.length)));
    }
    Ok(())
}

fn outside(x: f64) -> Result<()> {
    if !(x < 0.0 && x.is_finite()) {
        return Err(Error::OutOfDomain(format!("x = {x} must be negative")));
    }
    Ok(())
}

// ---------------------------------------------------------------- reflecting

/// `sqrt(beta/2) (1 - exp(-kappa L)) / sinh(kappa L)`.
pub fn force_reflecting(params: &ModelParams) -> Result<ForceResult> {
    require(params, Boundary::Reflecting)?;
    let s = params.kappa_reflecting() * params.length;
    // (1 - e^{-s}) / sinh(s) = 2 e^{-s} / (1 + e^{-s})
    let em = (-s).exp();
    let ratio = 2.0 * em / (1.0 + em);
    Ok(ForceResult {
        value: params.bulk_density() * ratio,
        mode: Boundary::Reflecting,
        method: Method::ClosedForm,
        uncertainty: None,
    })
}

/// Wall density just inside the interval, `sqrt(beta/2) (cosh(kappa L) - 1) / sinh(kappa L)`.
///
/// The reflecting two-point parity depends on `y - x` only, so this is also
/// the density at every interior point.
pub fn rho_reflecting_inside(params: &ModelParams) -> Result<f64> {
    require(params, Boundary::Reflecting)?;
    // (cosh s - 1) / sinh s = tanh(s / 2)
    Ok(params.bulk_density() * (0.5 * params.kappa_reflecting() * params.length).tanh())
}

pub fn rho_reflecting_outside(params: &ModelParams) -> Result<f64> {
    require(params, Boundary::Reflecting)?;
    Ok(params.bulk_density())
}

/// Expected parity of the particle count in `(0, x)` between reflecting walls,
/// `(sinh(kappa x) + sinh(kappa (L - x))) / sinh(kappa L)`.
pub fn parity_reflecting(params: &ModelParams, x: f64) -> Result<f64> {
    require(params, Boundary::Reflecting)?;
    inside(params, x)?;
    let k = params.kappa_reflecting();
    let l = params.length;
    // divide through by e^{kappa L} / 2 to avoid overflow
    let scaled = |d: f64| (k * (d - l)).exp() - (-k * (d + l)).exp();
    let den = 1.0 - (-2.0 * k * l).exp();
    Ok((scaled(x) + scaled(l - x)) / den)
}

// ----------------------------------------------------------- absorbing, outside

/// Density at `x < 0` next to an absorbing wall,
/// `-int_0^inf 2 beta e^{-4 beta u} / sqrt(2 pi u) erf(x / sqrt(2u)) du`.
pub fn density_outside_absorbing(params: &ModelParams, x: f64) -> Result<f64> {
    require(params, Boundary::Absorbing)?;
    outside(x)?;
    let beta = params.beta;
    let f = move |u: f64| -2.0 * beta * (-4.0 * beta * u).exp() / (2.0 * PI * u).sqrt() * erf(x / (2.0 * u).sqrt());
    let split = (0.5 * x * x).min(1.0 / (4.0 * beta)).max(1e-300);
    let q = integrate_halfline(&IntegralSpec::new(f).split_at(split).tolerances(1e-300, 1e-13))?;
    Ok(q.value.max(0.0))
}

/// Two-point parity `V(x, y)` for `x < y < 0`,
/// `1 + int_0^inf 4 beta e^{-4 beta u} erf((x+y)/(2 sqrt(2u))) erf((y-x)/(2 sqrt(2u))) du`.
pub fn parity_outside_absorbing(params: &ModelParams, x: f64, y: f64) -> Result<f64> {
    require(params, Boundary::Absorbing)?;
    outside(y)?;
    if !(x < y) {
        return Err(Error::OutOfDomain(format!("need x < y, got x = {x}, y = {y}")));
    }
    let beta = params.beta;
    let f = move |u: f64| {
        let r = 2.0 * (2.0 * u).sqrt();
        4.0 * beta * (-4.0 * beta * u).exp() * erf((x + y) / r) * erf((y - x) / r)
    };
    let d = y - x;
    let split = (d * d / 8.0).clamp(1e-300, 1.0 / (4.0 * beta));
    let q = integrate_halfline(&IntegralSpec::new(f).split_at(split).tolerances(1e-15, 1e-13))?;
    Ok((1.0 + q.value).clamp(-1.0, 1.0))
}

/// Flux into the wall from the outside at `x < 0`,
/// `int_0^inf 2 beta / (pi u) e^{-x^2/(2u)} e^{-4 beta u} du`, by quadrature.
pub fn flux_outside(params: &ModelParams, x: f64) -> Result<f64> {
    require(params, Boundary::Absorbing)?;
    outside(x)?;
    let beta = params.beta;
    let f = move |u: f64| 2.0 * beta / (PI * u) * (-x * x / (2.0 * u) - 4.0 * beta * u).exp();
    let split = x.abs() / (8.0 * beta).sqrt();
    let q = integrate_halfline(&IntegralSpec::new(f).split_at(split).tolerances(1e-300, FORCE_REL_TOL))?;
    Ok(q.value)
}

/// The same flux through the Bessel identity, `(4 beta / pi) K0(2 |x| sqrt(2 beta))`.
pub fn flux_outside_bessel(params: &ModelParams, x: f64) -> Result<f64> {
    outside(x)?;
    Ok(4.0 * params.beta / PI * bessel_k0(2.0 * x.abs() * (2.0 * params.beta).sqrt())?)
}

// ------------------------------------------------------------ absorbing, inside

/// `(pi / 2a) cosh(a (pi - phi)) / sinh(a pi)` for `0 <= phi <= 2 pi`.
fn cosh_kernel(phi: f64, a: f64) -> f64 {
    let num = (-a * phi).exp() + (-a * (2.0 * PI - phi)).exp();
    PI / (2.0 * a) * num / (-(-2.0 * a * PI).exp_m1())
}

/// `(pi / 2) sinh(a (pi - phi)) / sinh(a pi)` for `0 <= phi <= 2 pi`.
fn sinh_kernel(phi: f64, a: f64) -> f64 {
    let num = (-a * phi).exp() - (-a * (2.0 * PI - phi)).exp();
    0.5 * PI * num / (-(-2.0 * a * PI).exp_m1())
}

/// `sum_{n>=1} cos(n phi) / (n^2 + a^2)`.
fn cosine_sum(phi: f64, a: f64) -> f64 {
    cosh_kernel(phi, a) - 0.5 / (a * a)
}

fn reduced_b(params: &ModelParams) -> f64 {
    2.0 * params.length * params.beta.sqrt() / PI
}

/// Sums `sum_{m>=1} term(m)` for terms bounded by `c e^{-m phi_min} / m`.
///
/// Stops once the geometric tail bound drops below the running precision or
/// after `cutoff` terms, reporting the bound in both cases.
fn exponential_series(phi_min: f64, c: f64, cutoff: usize, mut term: impl FnMut(usize) -> f64) -> Result<SeriesValue> {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let ratio = (-phi_min).exp();
    for m in 1..=cutoff.min(MAX_SERIES_TERMS) {
        crate::special_fn::neumaier(&mut sum, &mut comp, term(m));
        let mf = m as f64;
        let tail = c * (-(mf + 1.0) * phi_min).exp() / ((mf + 1.0) * (1.0 - ratio));
        if tail <= SERIES_TOL * (sum + comp).abs() || tail < 1e-300 || m == cutoff {
            return Ok(SeriesValue {
                value: sum + comp,
                tail_bound: tail,
                terms: m,
            });
        }
    }
    Err(Error::NonConvergence(MAX_SERIES_TERMS))
}

/// Density between absorbing walls from the Fourier series of the two-point
/// parity. The inner sum over `n` is taken in closed form; the outer sum over
/// `m` runs to `n_terms` or until its exponentially small tail is below
/// double precision, whichever comes first.
pub fn density_inside_absorbing(params: &ModelParams, x: f64, n_terms: usize) -> Result<SeriesValue> {
    require(params, Boundary::Absorbing)?;
    inside(params, x)?;
    if n_terms == 0 {
        return Err(Error::InvalidInput("series truncation must be at least 1".into()));
    }
    let l = params.length;
    let beta = params.beta;
    let phi = PI * x / l;
    let b = reduced_b(params);
    let b2 = b * b;
    let c = b / 2f64.sqrt();

    // sum_n 8 beta L (1 - cos n pi) sin(n phi) / (n pi (n^2 pi^2 + 4 beta L^2))
    let single = (0.5 * PI - sinh_kernel(phi, b) - sinh_kernel(PI - phi, b)) / b2;
    // the cos(m phi) sin(m phi) diagonal contribution collected from the double sum
    let s0 = PI / (2.0 * c) / (PI * c).tanh() - 0.5 / (c * c);
    let diagonal = 0.25 * (s0 + cosine_sum(2.0 * phi, c));

    let phi_min = phi.min(PI - phi);
    let rest = exponential_series(phi_min, PI, n_terms, |m| {
        let mf = m as f64;
        let a = (mf * mf + b2).sqrt();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        (mf * phi).cos() * (sinh_kernel(phi, a) + sign * sinh_kernel(PI - phi, a)) / (2.0 * mf * mf + b2)
    })?;
    let scale = 16.0 * beta * l / PI.powi(3);
    let value = 0.5 * scale * single + scale * (0.5 * PI * diagonal - rest.value);
    Ok(SeriesValue {
        value: value.max(0.0),
        tail_bound: scale * rest.tail_bound,
        terms: rest.terms,
    })
}

/// Inside flux toward the nearer wall, from the theta-function integral
///
/// ```text
/// J(x) = 2 beta int_0^inf e^{-4 beta L^2 u} [theta^2(x/2L, i pi u) - theta^2(x/2L + 1/2, i pi u)] du.
/// ```
///
/// For `x > L/2` the value at `L - x` is returned, so `J(x) = J(L - x) > 0`.
pub fn flux_inside(params: &ModelParams, x: f64) -> Result<f64> {
    require(params, Boundary::Absorbing)?;
    inside(params, x)?;
    let x = x.min(params.length - x);
    let beta = params.beta;
    let l = params.length;
    let z = x / (2.0 * l);
    let rate = 4.0 * beta * l * l;
    let f = move |u: f64| {
        let t = PI * u;
        let e1 = theta_imag_excess(z, t);
        let e2 = theta_imag_excess(z + 0.5, t);
        (-rate * u).exp() * (e1 - e2) * (2.0 + e1 + e2)
    };
    let zz = z.min(0.5 - z);
    let split = (2.0 * zz * zz / (rate + PI * PI)).sqrt().max(1e-12);
    let q = integrate_halfline(&IntegralSpec::new(f).split_at(split).tolerances(1e-300, FORCE_REL_TOL))?;
    Ok(2.0 * beta * q.value)
}

/// Inside flux from the double Fourier series
///
/// ```text
/// J(x) = sum_n 8 beta (1 - cos n pi) / (n^2 pi^2 + 4 beta L^2) cos(n phi)
///      + sum_{m,n>0, m+n odd} 16 beta / ((m^2 + n^2) pi^2 + 4 beta L^2) cos(m phi) cos(n phi),
/// ```
///
/// with the sum over `n` done in closed form. Oriented like [`flux_inside`].
pub fn flux_inside_series(params: &ModelParams, x: f64) -> Result<SeriesValue> {
    require(params, Boundary::Absorbing)?;
    inside(params, x)?;
    let x = x.min(params.length - x);
    let beta = params.beta;
    let phi = PI * x / params.length;
    let b = reduced_b(params);
    let b2 = b * b;
    // odd-n cosine sum; the -1/(2a^2) parts cancel
    let head = 0.5 * (cosh_kernel(phi, b) - cosh_kernel(PI - phi, b));
    let phi_min = phi.min(PI - phi);
    let rest = exponential_series(phi_min, 2.01 * PI, MAX_SERIES_TERMS, |m| {
        let mf = m as f64;
        let a = (mf * mf + b2).sqrt();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        (mf * phi).cos() * (cosh_kernel(phi, a) - sign * cosh_kernel(PI - phi, a))
    })?;
    let scale = 8.0 * beta / (PI * PI);
    Ok(SeriesValue {
        value: scale * (head + rest.value),
        tail_bound: scale * rest.tail_bound,
        terms: rest.terms,
    })
}

/// Plain square truncation `1 <= m, n <= n_terms` of the double Fourier series
/// for the inside flux, without any resummation. Oriented like [`flux_inside`].
pub fn flux_inside_fourier_truncated(params: &ModelParams, x: f64, n_terms: usize) -> Result<f64> {
    require(params, Boundary::Absorbing)?;
    inside(params, x)?;
    let x = x.min(params.length - x);
    let beta = params.beta;
    let l = params.length;
    let c: Vec<f64> = (0..=n_terms).map(|n| (n as f64 * PI * x / l).cos()).collect();
    let shift = 4.0 * beta * l * l;
    let mut s = 0.0;
    for n in (1..=n_terms).step_by(2) {
        let nf = n as f64;
        s += 16.0 * beta / (nf * nf * PI * PI + shift) * c[n];
    }
    for m in 1..=n_terms {
        let mf = m as f64;
        let start = if m % 2 == 0 { 1 } else { 2 };
        for n in (start..=n_terms).step_by(2) {
            let nf = n as f64;
            s += 16.0 * beta / ((mf * mf + nf * nf) * PI * PI + shift) * c[m] * c[n];
        }
    }
    Ok(s)
}

/// Absorbing force from the two theta integrals
///
/// ```text
/// F = (2 beta / pi) int e^{-4 beta L^2 y} / y (1 - theta^2(0, i/(pi y))) dy
///   + 2 beta int e^{-4 beta L^2 y} theta^2(1/2, i pi y) dy.
/// ```
pub fn force_absorbing(params: &ModelParams) -> Result<ForceResult> {
    let (i1, i2) = force_absorbing_parts(params)?;
    let beta = params.beta;
    let value = 2.0 * beta / PI * i1.value + 2.0 * beta * i2.value;
    let uncertainty = 2.0 * beta / PI * i1.error_estimate + 2.0 * beta * i2.error_estimate;
    Ok(ForceResult {
        value,
        mode: Boundary::Absorbing,
        method: Method::ClosedForm,
        uncertainty: Some(uncertainty),
    })
}

/// The two integrals of [`force_absorbing`] separately.
pub fn force_absorbing_parts(
    params: &ModelParams,
) -> Result<(crate::quadrature::Quadrature, crate::quadrature::Quadrature)> {
    require(params, Boundary::Absorbing)?;
    let beta = params.beta;
    let l = params.length;
    let rate = 4.0 * beta * l * l;
    let first = move |y: f64| {
        let e = theta_imag_excess(0.0, 1.0 / (PI * y));
        -(-rate * y).exp() / y * e * (2.0 + e)
    };
    let second = move |y: f64| {
        let th = theta_imag(0.5, PI * y);
        (-rate * y).exp() * th * th
    };
    let split1 = 1.0 / (2.0 * l * beta.sqrt());
    let split2 = 1.0 / (2.0 * l * (2.0 * beta).sqrt());
    let i1 = integrate_halfline(&IntegralSpec::new(first).split_at(split1).tolerances(1e-300, FORCE_REL_TOL))?;
    let i2 = integrate_halfline(&IntegralSpec::new(second).split_at(split2).tolerances(1e-300, FORCE_REL_TOL))?;
    Ok((i1, i2))
}

/// Absorbing force as the limit of `J(-x) - J(x)` as `x` decreases to zero,
/// extrapolated from `x0, x0/2, x0/4` with `x0 = 0.05 min(L, 1/sqrt(beta))`.
///
/// The difference behaves like `F + c x^2 + O(x^4)`; two Richardson passes
/// remove the `x^2` and `x^4` terms and the reported uncertainty is the
/// change made by the second pass.
pub fn force_absorbing_flux_limit(params: &ModelParams) -> Result<ForceResult> {
    require(params, Boundary::Absorbing)?;
    let x0 = 0.05 * params.length.min(1.0 / params.beta.sqrt());
    let f = |x: f64| -> Result<f64> { Ok(flux_outside(params, -x)? - flux_inside(params, x)?) };
    let f0 = f(x0)?;
    let f1 = f(0.5 * x0)?;
    let f2 = f(0.25 * x0)?;
    let r0 = (4.0 * f1 - f0) / 3.0;
    let r1 = (4.0 * f2 - f1) / 3.0;
    let r2 = (16.0 * r1 - r0) / 15.0;
    Ok(ForceResult {
        value: r2,
        mode: Boundary::Absorbing,
        method: Method::FluxLimit,
        uncertainty: Some((r2 - r1).abs()),
    })
}

// ------------------------------------------------------------------- Fourier

/// Coefficients `a_{m,n}` of `V(x, y) = 1 + sum a_{m,n} cos(m pi x / L) cos(n pi y / L)`
/// for the skew-symmetric extension of the absorbing two-point parity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    #[serde(rename = "L")]
    pub length: f64,
    pub beta: f64,
    pub truncation: usize,
    table: Vec<f64>,
}

impl FourierCoefficients {
    pub fn get(&self, m: usize, n: usize) -> f64 {
        assert!(m <= self.truncation && n <= self.truncation, "index beyond truncation");
        self.table[m * (self.truncation + 1) + n]
    }

    /// Evaluates the truncated expansion at `(x, y)` in the square.
    pub fn reconstruct(&self, x: f64, y: f64) -> f64 {
        let n = self.truncation;
        let cx: Vec<f64> = (0..=n).map(|k| (k as f64 * PI * x / self.length).cos()).collect();
        let cy: Vec<f64> = (0..=n).map(|k| (k as f64 * PI * y / self.length).cos()).collect();
        let mut total = 0.0;
        for (m, row) in self.table.chunks_exact(n + 1).enumerate() {
            let inner: f64 = row.iter().zip(&cy).map(|(a, c)| a * c).sum();
            total += cx[m] * inner;
        }
        1.0 + total
    }
}

pub fn fourier_coefficients(params: &ModelParams, truncation: usize) -> Result<FourierCoefficients> {
    if truncation == 0 {
        return Err(Error::InvalidInput("Fourier truncation must be at least 1".into()));
    }
    let beta = params.beta;
    let l = params.length;
    let shift = 4.0 * beta * l * l;
    let pi2 = PI * PI;
    let odd = |k: usize| if k % 2 == 1 { 2.0 } else { 0.0 };
    let mut table = vec![0.0; (truncation + 1) * (truncation + 1)];
    for m in 0..=truncation {
        for n in 0..=truncation {
            let (mf, nf) = (m as f64, n as f64);
            let a = match (m, n) {
                (0, 0) => 0.0,
                _ if m == n => 0.0,
                (_, 0) => -16.0 * beta * l * l * odd(m) / (mf * mf * pi2 * (mf * mf * pi2 + shift)),
                (0, _) => 16.0 * beta * l * l * odd(n) / (nf * nf * pi2 * (nf * nf * pi2 + shift)),
                _ => {
                    32.0 * beta * l * l * odd(m + n) / ((nf * nf - mf * mf) * pi2 * ((mf * mf + nf * nf) * pi2 + shift))
                }
            };
            table[m * (truncation + 1) + n] = a;
        }
    }
    Ok(FourierCoefficients {
        length: l,
        beta,
        truncation,
        table,
    })
}

// ------------------------------------------------------------------ profiles

/// Closed-form density at each requested position of one region.
pub fn density_profile(params: &ModelParams, region: Region, xs: &[f64]) -> Result<DensityProfile> {
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        let rho = match (params.boundary, region) {
            (Boundary::Reflecting, Region::Outside) => {
                outside_or_wall(x)?;
                rho_reflecting_outside(params)?
            }
            (Boundary::Reflecting, Region::Inside) => {
                inside_or_wall(params, x)?;
                rho_reflecting_inside(params)?
            }
            (Boundary::Absorbing, Region::Outside) => {
                outside_or_wall(x)?;
                if x == 0.0 {
                    0.0
                } else {
                    density_outside_absorbing(params, x)?
                }
            }
            (Boundary::Absorbing, Region::Inside) => {
                inside_or_wall(params, x)?;
                if x == 0.0 || x == params.length {
                    0.0
                } else {
                    density_inside_absorbing(params, x, MAX_SERIES_TERMS)?.value
                }
            }
        };
        points.push(DensityPoint { x, rho, sigma: 0.0 });
    }
    Ok(DensityProfile {
        mode: params.boundary,
        region,
        points,
    })
}

/// Absorbing-mode flux at each position; negative `x` uses the outside flux.
pub fn flux_profile(params: &ModelParams, xs: &[f64]) -> Result<FluxProfile> {
    require(params, Boundary::Absorbing)?;
    let points = xs
        .iter()
        .map(|&x| {
            let j = if x < 0.0 { flux_outside(params, x)? } else { flux_inside(params, x)? };
            Ok(FluxPoint { x, j })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FluxProfile {
        mode: Boundary::Absorbing,
        points,
    })
}

fn outside_or_wall(x: f64) -> Result<()> {
    if x <= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("x = {x} must be non-positive")))
    }
}

fn inside_or_wall(params: &ModelParams, x: f64) -> Result<()> {
    if (0.0..=params.length).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("x = {x} must lie in [0, {}]", params.length)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn refl(beta: f64, l: f64) -> ModelParams {
        ModelParams::reflecting(beta, l).unwrap()
    }

    fn abs(beta: f64, l: f64) -> ModelParams {
        ModelParams::absorbing(beta, l).unwrap()
    }

    #[test]
    fn reflecting_force_small_separation() {
        let f = force_reflecting(&refl(1.0, 1e-8)).unwrap();
        assert!((f.value - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn reflecting_force_fixture() {
        // 30-digit evaluation of the formula
        let f = force_reflecting(&refl(1.0, 1.0)).unwrap();
        assert_relative_eq!(f.value, 0.276_578_195_396_273_7, max_relative = 1e-15);
    }

    #[test]
    fn reflecting_force_decay_constant() {
        let l = 50.0;
        let f = force_reflecting(&refl(1.0, l)).unwrap().value;
        assert!(f < 1e-30);
        assert_relative_eq!(f / (-l * 2f64.sqrt()).exp(), 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn reflecting_force_is_density_jump() {
        let p = refl(0.7, 1.3);
        let jump = rho_reflecting_outside(&p).unwrap() - rho_reflecting_inside(&p).unwrap();
        assert_relative_eq!(force_reflecting(&p).unwrap().value, jump, max_relative = 1e-14);
    }

    #[test]
    fn wrong_mode_is_rejected() {
        assert!(matches!(force_reflecting(&abs(1.0, 1.0)), Err(Error::WrongMode { .. })));
        assert!(matches!(force_absorbing(&refl(1.0, 1.0)), Err(Error::WrongMode { .. })));
    }

    #[test]
    fn parity_reflecting_values() {
        let p = refl(1.0, 2.0);
        assert_relative_eq!(parity_reflecting(&p, 1.0).unwrap(), 0.459_098_131_085_425_5, max_relative = 1e-14);
        assert!((parity_reflecting(&p, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        assert!(parity_reflecting(&p, 0.0).is_err());
        assert!(parity_reflecting(&p, 2.0).is_err());
        let far = refl(1.0, 800.0);
        assert!(parity_reflecting(&far, 400.0).unwrap().is_finite());
    }

    #[test]
    fn outside_absorbing_density() {
        let p = abs(1.0, 1.0);
        assert!(density_outside_absorbing(&p, -1e-12).unwrap() < 1e-10);
        assert!((density_outside_absorbing(&p, -50.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        // mpmath quadrature, 30 digits
        assert_relative_eq!(density_outside_absorbing(&p, -1.0).unwrap(), 0.690_251_758_003_452_8, max_relative = 1e-11);
    }

    #[test]
    fn outside_absorbing_parity() {
        let p = abs(1.0, 1.0);
        assert!((parity_outside_absorbing(&p, -1.0, -1.0 + 1e-12).unwrap() - 1.0).abs() < 1e-10);
        assert_relative_eq!(parity_outside_absorbing(&p, -2.0, -1.0).unwrap(), 0.249_646_154_981_098_33, max_relative = 1e-11);
        // reflection symmetry of the wall: d/dy V at y = 0 vanishes
        let h = 1e-4;
        let d = (parity_outside_absorbing(&p, -1.5, -h).unwrap() - parity_outside_absorbing(&p, -1.5, -2.0 * h).unwrap()) / h;
        assert!(d.abs() < 1e-3);
    }

    #[test]
    fn outside_parity_derivative_is_density() {
        let p = abs(1.0, 1.0);
        let (x, h) = (-0.8, 1e-4);
        let v1 = parity_outside_absorbing(&p, x, x + h).unwrap();
        let v2 = parity_outside_absorbing(&p, x, x + 2.0 * h).unwrap();
        let rho = -0.5 * (-3.0 + 4.0 * v1 - v2) / (2.0 * h);
        assert_relative_eq!(rho, density_outside_absorbing(&p, x).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn outside_flux_matches_bessel() {
        let p = abs(1.0, 1.0);
        let q = flux_outside(&p, -0.5).unwrap();
        assert_relative_eq!(q, flux_outside_bessel(&p, -0.5).unwrap(), max_relative = 1e-12);
        assert!(flux_outside(&p, -40.0).unwrap() < 1e-40);
    }

    #[test]
    fn outside_flux_log_divergence() {
        let p = abs(1.0, 1.0);
        let a = flux_outside(&p, -1e-3).unwrap();
        let b = flux_outside(&p, -1e-4).unwrap();
        assert_relative_eq!((b - a) / 10f64.ln(), 4.0 / PI, max_relative = 1e-4);
    }

    #[test]
    fn inside_density_fixtures() {
        let p = abs(1.0, 1.0);
        let mid = density_inside_absorbing(&p, 0.5, 512).unwrap();
        assert_relative_eq!(mid.value, 0.520_350_130_672_875, max_relative = 1e-13);
        let a = density_inside_absorbing(&p, 0.3, 512).unwrap().value;
        let b = density_inside_absorbing(&p, 0.7, 512).unwrap().value;
        assert_relative_eq!(a, 0.476_469_160_341_511, max_relative = 1e-13);
        assert_relative_eq!(a, b, max_relative = 1e-13);
        let near = density_inside_absorbing(&p, 1e-4, usize::MAX).unwrap().value;
        assert!(near > 0.0 && near < 2e-3);
        assert!(near < density_inside_absorbing(&p, 1e-3, usize::MAX).unwrap().value);
    }

    #[test]
    fn inside_density_honours_cutoff() {
        let p = abs(1.0, 1.0);
        let exact = density_inside_absorbing(&p, 0.02, usize::MAX).unwrap();
        let cut = density_inside_absorbing(&p, 0.02, 20).unwrap();
        assert_eq!(cut.terms, 20);
        assert!((cut.value - exact.value).abs() <= cut.tail_bound);
    }

    #[test]
    fn inside_flux_fixture_and_series() {
        let p = abs(1.0, 1.0);
        // both representations in 30-digit arithmetic agree on this value
        assert_relative_eq!(flux_inside(&p, 0.3).unwrap(), 0.474_369_993_171_129_4, max_relative = 1e-11);
        assert_relative_eq!(flux_inside(&p, 0.1).unwrap(), 1.655_129_164_365_384_2, max_relative = 1e-11);
        let s = flux_inside_series(&p, 0.1).unwrap();
        assert_relative_eq!(s.value, 1.655_129_164_365_384_2, max_relative = 1e-13);
        assert!(s.tail_bound < 1e-15);
    }

    #[test]
    fn truncated_fourier_flux_approaches_resummed() {
        let p = abs(1.0, 1.0);
        let exact = flux_inside_series(&p, 0.3).unwrap().value;
        let e100 = (flux_inside_fourier_truncated(&p, 0.3, 100).unwrap() - exact).abs();
        let e400 = (flux_inside_fourier_truncated(&p, 0.3, 400).unwrap() - exact).abs();
        assert!(e400 < e100 && e400 < 1e-5, "{e100} {e400}");
    }

    #[test]
    fn inside_flux_symmetric() {
        let p = abs(1.3, 0.8);
        assert_relative_eq!(flux_inside(&p, 0.2).unwrap(), flux_inside(&p, 0.6).unwrap(), max_relative = 1e-11);
    }

    #[test]
    fn absorbing_force_fixtures() {
        // 30-digit quadrature of the theta integrals
        let cases = [
            (0.5, 0.662_606_528_865_454_5),
            (1.0, 0.158_093_601_637_531_23),
            (2.0, 0.008_428_432_424_856_646),
        ];
        for (l, v) in cases {
            assert_relative_eq!(force_absorbing(&abs(1.0, l)).unwrap().value, v, max_relative = 1e-11);
        }
        let (i1, i2) = force_absorbing_parts(&abs(1.0, 1.0)).unwrap();
        assert_relative_eq!(i1.value, -0.105_817_186_320_543_43, max_relative = 1e-11);
        assert_relative_eq!(i2.value, 0.112_729_457_352_746_77, max_relative = 1e-11);
    }

    #[test]
    fn flux_limit_agrees_with_theta_integrals() {
        for l in [0.5, 1.0, 2.0] {
            let p = abs(1.0, l);
            let a = force_absorbing(&p).unwrap().value;
            let b = force_absorbing_flux_limit(&p).unwrap();
            assert_relative_eq!(a, b.value, max_relative = 1e-6);
            assert!(b.uncertainty.unwrap() < 1e-6 * a);
        }
    }

    #[test]
    fn absorbing_force_prefactor_settles() {
        let r: Vec<f64> = [5.0, 6.0, 7.0]
            .iter()
            .map(|&l| force_absorbing(&abs(1.0, l)).unwrap().value * l.sqrt() * (l * 8f64.sqrt()).exp())
            .collect();
        assert!(r.iter().all(|&v| v > 0.0));
        assert!((r[2] / r[0] - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn fourier_table() {
        let t = fourier_coefficients(&abs(1.0, 1.0), 8).unwrap();
        let pi2 = PI * PI;
        assert_relative_eq!(t.get(1, 0), -32.0 / (pi2 * (pi2 + 4.0)), max_relative = 1e-15);
        assert_eq!(t.get(2, 0), 0.0);
        for m in 0..=8 {
            assert_eq!(t.get(m, m), 0.0);
            for n in 0..=8 {
                assert_eq!(t.get(m, n), -t.get(n, m));
                if m > 0 && n > 0 && (m + n) % 2 == 0 {
                    assert_eq!(t.get(m, n), 0.0);
                }
            }
        }
        assert!(fourier_coefficients(&abs(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn fourier_coefficient_projects_forcing() {
        // (Delta - 4 beta) U = 4 beta sign(y - x) mode by mode: a_{mn} = 4 beta s_{mn} / (-k^2 - 4 beta)
        let (beta, l) = (0.8, 1.4);
        let t = fourier_coefficients(&abs(beta, l), 4).unwrap();
        let n = 800;
        let h = l / n as f64;
        for (m, k) in [(1usize, 0usize), (1, 2), (3, 2), (0, 3), (2, 1)] {
            let mut s = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) * h;
                for j in 0..n {
                    let y = (j as f64 + 0.5) * h;
                    let sg = if y > x { 1.0 } else if y < x { -1.0 } else { 0.0 };
                    s += sg * (m as f64 * PI * x / l).cos() * (k as f64 * PI * y / l).cos();
                }
            }
            let norm = |q: usize| if q == 0 { l } else { 0.5 * l };
            let proj = s * h * h / (norm(m) * norm(k));
            let k2 = ((m * m + k * k) as f64) * PI * PI / (l * l);
            let expected = 4.0 * beta * proj / (-k2 - 4.0 * beta);
            assert!((t.get(m, k) - expected).abs() < 2e-4 * t.get(1, 0).abs(), "({m},{k})");
        }
    }

    #[test]
    fn fourier_reconstruction_on_diagonal() {
        let t = fourier_coefficients(&abs(1.0, 1.0), 1000).unwrap();
        assert!((t.reconstruct(0.3, 0.3) - 1.0).abs() < 1e-3);
        assert!(t.reconstruct(0.25, 0.75) < 1.0);
    }

    #[test]
    fn profiles() {
        let p = abs(1.0, 1.0);
        let inner = density_profile(&p, Region::Inside, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(inner.points[0].rho, 0.0);
        assert_eq!(inner.points[2].rho, 0.0);
        let fl = flux_profile(&p, &[-0.5, 0.25, 0.75]).unwrap();
        assert_relative_eq!(fl.points[1].j, fl.points[2].j, max_relative = 1e-11);
        assert!(fl.points.iter().all(|q| q.j > 0.0));
        assert!(density_profile(&p, Region::Outside, &[0.5]).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(32))]

        #[test]
        fn reflecting_parity_symmetric_and_bounded(beta in 0.05f64..5.0, l in 0.1f64..6.0, frac in 0.01f64..0.99) {
            let p = refl(beta, l);
            let v = parity_reflecting(&p, frac * l).unwrap();
            let w = parity_reflecting(&p, (1.0 - frac) * l).unwrap();
            proptest::prop_assert!((v - w).abs() < 1e-13);
            proptest::prop_assert!(v > 0.0 && v <= 1.0 + 1e-15);
        }

        #[test]
        fn reflecting_scaling_identity(beta in 0.1f64..4.0, l in 0.1f64..4.0) {
            let c = 2.0;
            let a = force_reflecting(&refl(beta, l)).unwrap().value;
            let b = force_reflecting(&refl(c * c * beta, l / c)).unwrap().value;
            proptest::prop_assert!((b / a - c).abs() < 1e-13);
            let ra = rho_reflecting_inside(&refl(beta, l)).unwrap();
            let rb = rho_reflecting_inside(&refl(c * c * beta, l / c)).unwrap();
            proptest::prop_assert!((rb / ra - c).abs() < 1e-13);
        }

        #[test]
        fn inside_absorbing_density_symmetric(frac in 0.02f64..0.98) {
            let p = abs(1.0, 1.0);
            let a = density_inside_absorbing(&p, frac, usize::MAX).unwrap().value;
            let b = density_inside_absorbing(&p, 1.0 - frac, usize::MAX).unwrap().value;
            proptest::prop_assert!((a - b).abs() < 1e-12);
            proptest::prop_assert!(a > 0.0);
        }
    }
}
