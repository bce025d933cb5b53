//! Jacobi theta function, its modular transform, the theta tail remainder and erf.
//!
//! The convention is the third theta function
//!
//! ```text
//! theta(z, tau) = sum_{n in Z} exp(i pi n^2 tau + 2 pi i n z),   Im(tau) > 0,
//! ```
//!
//! so that `sum_{n>=1} exp(-n^2 pi^2 u / L^2) cos(n pi x / L) = (theta(x/2L, i pi u/L^2) - 1) / 2`.
//! The modular identity used throughout is
//!
//! ```text
//! theta(z, tau) = (-i tau)^{-1/2} exp(-i pi z^2 / tau) theta(z / tau, -1 / tau).
//! ```

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Hard cap on the number of series terms (per sign of `n`).
pub const MAX_TERMS: usize = 10_000;

/// Below this `Im(tau)` the automatic branch applies the modular transform.
pub const AUTO_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    DirectSeries,
    ModularTransform,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaArgument {
    pub z: Complex64,
    pub tau: Complex64,
    pub branch: Branch,
}

impl ThetaArgument {
    pub fn new(z: Complex64, tau: Complex64) -> Self {
        ThetaArgument {
            z,
            tau,
            branch: Branch::Auto,
        }
    }

    /// `z` real and `tau = i t` purely imaginary, the only shape the force formulas use.
    pub fn imaginary(z: f64, t: f64) -> Self {
        Self::new(Complex64::new(z, 0.0), Complex64::new(0.0, t))
    }

    pub fn with_branch(self, branch: Branch) -> Self {
        ThetaArgument { branch, ..self }
    }

    fn check(&self) -> Result<()> {
        if !(self.tau.im > 0.0) || !self.tau.re.is_finite() || !self.z.re.is_finite() {
            return Err(Error::TauNotInUpperHalfPlane(self.tau.im));
        }
        Ok(())
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, v.re);
        neumaier(&mut self.im, &mut self.im_c, v.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

#[inline]
pub(crate) fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Sums the series directly after shifting `Re z` into `[-1/2, 1/2]`.
fn theta_direct(z: Complex64, tau: Complex64, tol: f64) -> Result<Complex64> {
    let z = Complex64::new(z.re - z.re.round(), z.im);
    let a = PI * tau.im;
    let b = 2.0 * PI * z.im.abs();
    // |term(n)| <= exp(-a n^2 + b n); increasing until n_peak.
    let n_peak = (b / (2.0 * a)).ceil() as usize;

    let mut acc = CompensatedSum::default();
    acc.add(Complex64::new(1.0, 0.0));
    let i_pi_tau = Complex64::i() * PI * tau;
    let two_pi_i_z = Complex64::i() * 2.0 * PI * z;
    for n in 1..=MAX_TERMS {
        let nf = n as f64;
        let base = i_pi_tau * (nf * nf);
        let plus = (base + two_pi_i_z * nf).exp();
        let minus = (base - two_pi_i_z * nf).exp();
        if !(plus.re.is_finite() && plus.im.is_finite() && minus.re.is_finite() && minus.im.is_finite()) {
            return Err(Error::NonConvergence(n));
        }
        acc.add(plus);
        acc.add(minus);
        if n >= n_peak {
            // tail after n: ratio of consecutive bounds is exp(-a(2n+1) + b) < 1 here
            let next = (-a * (nf + 1.0).powi(2) + b * (nf + 1.0)).exp();
            let ratio = (-a * (2.0 * nf + 3.0) + b).exp();
            if ratio < 1.0 && 2.0 * next / (1.0 - ratio) < tol {
                return Ok(acc.value());
            }
        }
    }
    Err(Error::NonConvergence(MAX_TERMS))
}

/// The modular image `(z/tau, -1/tau)` of `arg` and the prefactor
/// `(-i tau)^{-1/2} exp(-i pi z^2 / tau)` with `theta(arg) = prefactor * theta(image)`.
pub fn theta_modular(arg: &ThetaArgument) -> Result<(ThetaArgument, Complex64)> {
    arg.check()?;
    let tau = arg.tau;
    let z = arg.z;
    let image = ThetaArgument {
        z: z / tau,
        tau: -tau.inv(),
        branch: Branch::DirectSeries,
    };
    let minus_i_tau = -Complex64::i() * tau;
    let prefactor = minus_i_tau.sqrt().inv() * (-Complex64::i() * PI * z * z / tau).exp();
    Ok((image, prefactor))
}

/// Evaluates `theta(z, tau)` with absolute truncation error below `tol`.
pub fn theta(arg: &ThetaArgument, tol: f64) -> Result<Complex64> {
    arg.check()?;
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidInput(format!("theta tolerance must lie in (0, 1e-3], got {tol}")));
    }
    let branch = match arg.branch {
        Branch::Auto => {
            // theta(z, tau + 2) = theta(z, tau)
            let shifted = arg.tau.re - 2.0 * (arg.tau.re / 2.0).round();
            let tau = Complex64::new(shifted, arg.tau.im);
            let image_im = tau.im / tau.norm_sqr();
            if tau.im < AUTO_THRESHOLD && image_im > tau.im {
                return via_modular(&ThetaArgument { tau, ..*arg }, tol);
            }
            return theta_direct(arg.z, tau, tol);
        }
        b => b,
    };
    match branch {
        Branch::DirectSeries => theta_direct(arg.z, arg.tau, tol),
        _ => via_modular(arg, tol),
    }
}

fn via_modular(arg: &ThetaArgument, tol: f64) -> Result<Complex64> {
    let (image, prefactor) = theta_modular(arg)?;
    let scale = prefactor.norm().max(1.0);
    Ok(prefactor * theta_direct(image.z, image.tau, tol / scale)?)
}

/// `theta(z, i t) - 1` for real `z` and `t > 0`, computed without cancellation
/// when the nome is small. The force integrands subtract theta values that are
/// both close to one, so they use this form.
pub fn theta_imag_excess(z: f64, t: f64) -> f64 {
    debug_assert!(t > 0.0);
    let z = z - z.round();
    if t >= AUTO_THRESHOLD {
        let mut s = 0.0;
        let mut c = 0.0;
        for n in 1..MAX_TERMS {
            let nf = n as f64;
            let mag = (-PI * nf * nf * t).exp();
            if mag == 0.0 {
                break;
            }
            neumaier(&mut s, &mut c, 2.0 * mag * (2.0 * PI * nf * z).cos());
            if mag < 1e-18 * (s + c).abs().max(1e-300) {
                break;
            }
        }
        s + c
    } else {
        theta_imag(z, t) - 1.0
    }
}

/// `theta(z, i t)` for real `z` and `t > 0`.
///
/// For `t < 1` this is the modular image written as a sum of Gaussians,
/// `t^{-1/2} sum_k exp(-pi (z - k)^2 / t)`, which is positive term by term.
pub fn theta_imag(z: f64, t: f64) -> f64 {
    debug_assert!(t > 0.0);
    let z = z - z.round();
    if t >= AUTO_THRESHOLD {
        return 1.0 + theta_imag_excess(z, t);
    }
    let mut s = 0.0;
    let mut c = 0.0;
    // terms decrease away from the nearest integer to z (which is 0 after the shift)
    neumaier(&mut s, &mut c, (-PI * z * z / t).exp());
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        let a = (-PI * (z - kf).powi(2) / t).exp();
        let b = (-PI * (z + kf).powi(2) / t).exp();
        neumaier(&mut s, &mut c, a);
        neumaier(&mut s, &mut c, b);
        if a.max(b) < 1e-18 * (s + c) || a.max(b) == 0.0 {
            break;
        }
    }
    (s + c) / t.sqrt()
}

/// Certified upper bound on `R(u) = sum_{n>=2} exp(-n^2 / u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaTailBound {
    pub u: f64,
    pub bound: f64,
}

/// Partial sum of `R(u)` plus a geometric bound on what is left, never above
/// the coarse estimate `1 / (1 - exp(-4/u))`.
pub fn theta_tail(u: f64) -> ThetaTailBound {
    assert!(u > 0.0, "theta_tail requires u > 0");
    let coarse = 1.0 / (-(-4.0 / u).exp_m1());
    // sum_{n>=2} e^{-n^2/u} <= int_1^inf e^{-s^2/u} ds <= sqrt(pi u)/2
    if u > 1e6 {
        return ThetaTailBound {
            u,
            bound: (0.5 * (PI * u).sqrt()).min(coarse),
        };
    }
    let mut sum = 0.0;
    let mut n = 2usize;
    loop {
        let nf = n as f64;
        let term = (-nf * nf / u).exp();
        sum += term;
        let next = nf + 1.0;
        let head = (-next * next / u).exp();
        // (next + k)^2 - next^2 >= k (2 next + 1) for k >= 1
        let ratio = (-(2.0 * next + 1.0) / u).exp();
        let tail = head / (1.0 - ratio);
        if tail <= 1e-17 * sum || head == 0.0 {
            let bound = (sum + tail) * (1.0 + 4.0 * f64::EPSILON);
            return ThetaTailBound {
                u,
                bound: bound.min(coarse),
            };
        }
        n += 1;
    }
}

/// The error function `2/sqrt(pi) int_0^x exp(-s^2) ds`.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
