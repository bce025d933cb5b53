//! Double-exponential quadrature on `(0, inf)` and the Bessel function `K0`.
//!
//! The half-line is split at `split_point`. The finite piece `(0, s)` uses the
//! logistic substitution `u = s / (1 + exp(-pi sinh t))`, which sends both
//! endpoints to doubly exponentially small weights. The infinite piece
//! `(s, inf)` uses `u = s (1 + exp(pi/2 sinh t))`. Both rules share one
//! trapezoid grid in `t`, refined by halving `h` and reusing old nodes.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Number of grid halvings after the unit-step level.
pub const MAX_DEPTH: usize = 12;
const MIN_DEPTH: usize = 3;
const T_MAX: f64 = 4.5;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// An integrand on `(0, inf)` together with the split point and tolerances.
#[derive(Clone, Copy)]
pub struct IntegralSpec<F> {
    pub integrand: F,
    pub split_point: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl<F: Fn(f64) -> f64> IntegralSpec<F> {
    pub fn new(integrand: F) -> Self {
        IntegralSpec {
            integrand,
            split_point: 1.0,
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
        }
    }

    pub fn split_at(mut self, split_point: f64) -> Self {
        self.split_point = split_point;
        self
    }

    pub fn tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Change between the last two refinement levels.
    pub error_estimate: f64,
    pub evaluations: usize,
    pub depth: usize,
}

/// Node and weight of the finite-interval rule at `t`, for the interval `(0, s)`.
#[inline]
fn finite_node(s: f64, t: f64) -> (f64, f64) {
    // e = exp(-pi |sinh t|) keeps every intermediate bounded
    let sh = t.sinh();
    let e = (-PI * sh.abs()).exp();
    let d = 1.0 + e;
    let u = if sh >= 0.0 { s / d } else { s * e / d };
    let w = s * PI * t.cosh() * e / (d * d);
    (u, w)
}

#[inline]
fn infinite_node(s: f64, t: f64) -> (f64, f64) {
    let e = (FRAC_PI_2 * t.sinh()).exp();
    (s * (1.0 + e), s * FRAC_PI_2 * t.cosh() * e)
}

/// Integrates `spec.integrand` over `(0, inf)`.
///
/// The result satisfies `error_estimate <= max(abs_tol, rel_tol |value|)`;
/// otherwise `ToleranceNotReached` is returned with the best estimate.
pub fn integrate_halfline<F: Fn(f64) -> f64>(spec: &IntegralSpec<F>) -> Result<Quadrature> {
    let s = spec.split_point;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("split point must be positive, got {s}")));
    }
    if !(spec.abs_tol > 0.0 && spec.rel_tol > 0.0) {
        return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
    }
    let f = &spec.integrand;
    let mut evaluations = 0usize;
    let mut sample = |t: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (u, w) in [finite_node(s, t), infinite_node(s, t)] {
            if u == 0.0 || w == 0.0 || !u.is_finite() || !w.is_finite() {
                continue;
            }
            let v = f(u);
            evaluations += 1;
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand(u));
            }
            acc += v * w;
        }
        Ok(acc)
    };

    // level 0: integer nodes
    let n0 = T_MAX.floor() as i64;
    let mut raw = 0.0;
    for j in -n0..=n0 {
        raw += sample(j as f64)?;
    }
    let mut h = 1.0;
    let mut value = raw * h;
    let mut error = f64::INFINITY;

    for depth in 1..=MAX_DEPTH {
        h *= 0.5;
        let jmax = (T_MAX / h).floor() as i64;
        let mut fresh = 0.0;
        let mut j = -jmax + if jmax % 2 == 0 { 1 } else { 0 };
        while j <= jmax {
            fresh += sample(j as f64 * h)?;
            j += 2;
        }
        raw += fresh;
        let next = raw * h;
        error = (next - value).abs();
        value = next;
        if depth >= MIN_DEPTH && error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error_estimate: error,
                evaluations,
                depth,
            });
        }
    }
    Err(Error::ToleranceNotReached { value, error })
}

/// Modified Bessel function of the second kind of order zero.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::NonPositiveArgument(x));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= 2.0 { k0_series(x) } else { k0_continued_fraction(x) })
}

/// `K0(x) = -(ln(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 H_k`.
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
}

/// Steed's continued fraction for `K0` (Temme's CF2 with order zero), `x >= 2`.
fn k0_continued_fraction(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() / s
}
