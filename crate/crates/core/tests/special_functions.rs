use std::f64::consts::PI;

use casimir_core::closed_form::{flux_outside, flux_outside_bessel};
use casimir_core::quadrature::{bessel_k0, integrate_halfline, IntegralSpec};
use casimir_core::special_fn::{erf, erfc, theta, theta_imag, theta_modular, Branch, ThetaArgument};
use casimir_core::ModelParams;
use num_complex::Complex64;

/// theta(0, i) = pi^{1/4} / Gamma(3/4), 30-digit reference.
const THETA_AT_I: f64 = 1.086_434_811_213_308_014_575_316_121_392_3;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn theta_at_i_matches_reference() {
    for branch in [Branch::Auto, Branch::DirectSeries, Branch::ModularTransform] {
        let arg = ThetaArgument::new(c(0.0, 0.0), c(0.0, 1.0)).with_branch(branch);
        let v = theta(&arg, 1e-16).unwrap();
        assert!((v.re - THETA_AT_I).abs() < 1e-13, "{branch:?}: {v}");
        assert!(v.im.abs() < 1e-15);
    }
    assert!((theta_imag(0.0, 1.0) - THETA_AT_I).abs() < 1e-13);
}

#[test]
fn jacobi_identity_on_fifty_points() {
    let zs = [c(0.0, 0.0), c(0.1, 0.0), c(0.25, 0.0), c(0.3, 0.2), c(0.5, -0.1)];
    let taus = [
        c(0.0, 0.5),
        c(0.0, 0.8),
        c(0.3, 0.7),
        c(-0.4, 1.2),
        c(0.5, 0.5),
        c(0.0, 1.0),
        c(0.0, 1.5),
        c(0.2, 2.0),
        c(-1.0, 0.9),
        c(0.1, 0.6),
    ];
    let mut worst: f64 = 0.0;
    for &z in &zs {
        for &tau in &taus {
            let arg = ThetaArgument::new(z, tau).with_branch(Branch::DirectSeries);
            let direct = theta(&arg, 1e-17).unwrap();
            let (image, prefactor) = theta_modular(&arg).unwrap();
            let transformed = prefactor * theta(&image, 1e-17).unwrap();
            let residual = (direct - transformed).norm() / direct.norm().max(1.0);
            worst = worst.max(residual);
        }
    }
    assert!(worst < 1e-12, "worst residual {worst:e}");
}

#[test]
fn erf_solves_the_heat_equation() {
    // u(x, t) = erf(x / sqrt(4 t)) satisfies u_t = u_xx
    let u = |x: f64, t: f64| erf(x / (4.0 * t).sqrt());
    let h = 1e-3;
    for &(x, t) in &[(0.3, 0.5), (1.0, 1.0), (-0.7, 0.2), (2.0, 3.0)] {
        let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
        assert!((ut - uxx).abs() < 2e-5, "x={x} t={t}: {ut} vs {uxx}");
    }
}

#[test]
fn erfc_matches_gaussian_tail_quadrature() {
    for a in [0.0, 0.5, 1.0, 2.5] {
        let q = integrate_halfline(&IntegralSpec::new(move |v: f64| (-(a + v) * (a + v)).exp())).unwrap();
        let expected = 2.0 / PI.sqrt() * q.value;
        assert!((erfc(a) - expected).abs() < 1e-14, "a={a}");
        assert!((erf(a) + erfc(a) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn bessel_k0_matches_integral_representation() {
    // K0(x) = int_0^inf exp(-x cosh t) dt
    for x in [0.05, 0.5, 1.0, 2.0, 2.5, 7.0, 30.0] {
        let q = integrate_halfline(&IntegralSpec::new(move |t: f64| (-x * t.cosh()).exp()).tolerances(1e-300, 1e-14))
            .unwrap();
        let k = bessel_k0(x).unwrap();
        assert!((k - q.value).abs() < 1e-13 * k, "x={x}: {k} vs {}", q.value);
    }
}

#[test]
fn outside_flux_bessel_identity() {
    for beta in [0.5, 1.0, 2.0] {
        let p = ModelParams::absorbing(beta, 1.0).unwrap();
        for x in [0.1, 0.5, 1.0] {
            let quad = flux_outside(&p, -x).unwrap();
            let bessel = flux_outside_bessel(&p, -x).unwrap();
            assert!((quad / bessel - 1.0).abs() < 1e-10, "beta={beta} x={x}");
        }
    }
}
