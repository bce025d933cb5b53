//! Verification suites bundled behind `casimir verify`.

use num_complex::Complex64;
use serde::Serialize;

use casimir_core::asymptotics::{fit_decay, saddle_point};
use casimir_core::closed_form::*;
use casimir_core::lattice_sim::{simulate, SimParams};
use casimir_core::pde_oracle::{default_force_grid, force_absorbing_oracle, force_reflecting_oracle};
use casimir_core::special_fn::{theta, theta_imag, theta_modular, Branch, ThetaArgument};
use casimir_core::{Boundary, ModelParams};

use crate::Suite;

/// theta(0, i) = pi^{1/4} / Gamma(3/4).
pub const THETA_AT_I: f64 = 1.086_434_811_213_308_014_575_316_121_392_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub metric: Metric,
    pub pass: bool,
}

impl Check {
    fn new(id: impl Into<String>, description: impl Into<String>, expected: f64, observed: f64, tolerance: f64, metric: Metric) -> Self {
        let diff = (observed - expected).abs();
        let pass = match metric {
            Metric::Absolute => diff <= tolerance,
            Metric::Relative => diff <= tolerance * expected.abs(),
        };
        Check {
            id: id.into(),
            description: description.into(),
            expected,
            observed,
            tolerance,
            metric,
            pass,
        }
    }

    fn failed(id: impl Into<String>, description: String, expected: f64, tolerance: f64, metric: Metric) -> Self {
        Check {
            id: id.into(),
            description,
            expected,
            observed: f64::NAN,
            tolerance,
            metric,
            pass: false,
        }
    }
}

fn attempt<F>(id: &str, description: &str, expected: f64, tolerance: f64, metric: Metric, f: F) -> Check
where
    F: FnOnce() -> casimir_core::Result<f64>,
{
    match f() {
        Ok(v) => Check::new(id, description, expected, v, tolerance, metric),
        Err(e) => Check::failed(id, format!("{description}: {e}"), expected, tolerance, metric),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub overall: bool,
    pub provenance: Provenance,
}

pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    let mut checks = Vec::new();
    if matches!(suite, Suite::All | Suite::ClosedForm) {
        checks.extend(closed_form_checks());
    }
    if matches!(suite, Suite::All | Suite::Oracle) {
        checks.extend(oracle_checks());
    }
    if matches!(suite, Suite::All | Suite::Asymptotics) {
        checks.extend(asymptotic_checks());
    }
    if matches!(suite, Suite::All | Suite::Simulation) {
        checks.extend(simulation_checks(seed));
    }
    let name = match suite {
        Suite::All => "all",
        Suite::ClosedForm => "closed-form",
        Suite::Oracle => "oracle",
        Suite::Asymptotics => "asymptotics",
        Suite::Simulation => "simulation",
    };
    VerifyReport {
        suite: name.into(),
        overall: checks.iter().all(|c| c.pass),
        checks,
        provenance: Provenance {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed,
        },
    }
}

fn reflecting(beta: f64, l: f64) -> ModelParams {
    ModelParams {
        beta,
        length: l,
        boundary: Boundary::Reflecting,
    }
}

fn absorbing(beta: f64, l: f64) -> ModelParams {
    ModelParams {
        beta,
        length: l,
        boundary: Boundary::Absorbing,
    }
}

/// Largest relative residual of the modular transformation over a 5 x 10 grid.
pub fn jacobi_residual() -> casimir_core::Result<f64> {
    let c = Complex64::new;
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
            let direct = theta(&arg, 1e-17)?;
            let (image, prefactor) = theta_modular(&arg)?;
            let transformed = prefactor * theta(&image, 1e-17)?;
            worst = worst.max((direct - transformed).norm() / direct.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Largest `|theta form - Fourier series|` of the inside flux on ten points.
pub fn representation_gap(params: &ModelParams) -> casimir_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let x = params.length * (0.05 + 0.1 * f64::from(k));
        let a = flux_inside(params, x)?;
        let b = flux_inside_series(params, x)?.value;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

fn closed_form_checks() -> Vec<Check> {
    use Metric::*;
    let mut v = vec![
        attempt("cf.reflecting.fixture", "reflecting force, beta=1, L=1", 0.276_578_195_396_273_7, 1e-14, Relative, || {
            Ok(force_reflecting(&reflecting(1.0, 1.0))?.value)
        }),
        attempt("cf.parity.fixture", "reflecting parity at L/2, beta=1, L=2", 0.459_098_131_085_425_5, 1e-14, Absolute, || {
            parity_reflecting(&reflecting(1.0, 2.0), 1.0)
        }),
        attempt("cf.theta.i", "theta(0, i)", THETA_AT_I, 1e-13, Absolute, || Ok(theta_imag(0.0, 1.0))),
        attempt("cf.theta.jacobi", "modular identity residual, 50 points", 0.0, 1e-12, Absolute, jacobi_residual),
        attempt("cf.flux.representations", "inside flux theta form vs Fourier series, beta=1, L=1", 0.0, 1e-8, Absolute, || {
            representation_gap(&absorbing(1.0, 1.0))
        }),
        attempt("cf.scaling.reflecting", "F_R(4 beta, L/2) / F_R(beta, L) = 2", 2.0, 1e-14, Relative, || {
            Ok(force_reflecting(&reflecting(4.0, 0.5))?.value / force_reflecting(&reflecting(1.0, 1.0))?.value)
        }),
        attempt("cf.scaling.absorbing", "F_A(4 beta, L/2) / F_A(beta, L) = 4", 4.0, 1e-8, Relative, || {
            Ok(force_absorbing(&absorbing(4.0, 0.5))?.value / force_absorbing(&absorbing(1.0, 1.0))?.value)
        }),
    ];
    for (l, expected) in [(0.5, 0.662_606_528_865_454_5), (1.0, 0.158_093_601_637_531_23), (2.0, 0.008_428_432_424_856_646)] {
        v.push(attempt(&format!("cf.absorbing.fixture.L{l}"), &format!("absorbing force, beta=1, L={l}"), expected, 1e-10, Relative, || {
            Ok(force_absorbing(&absorbing(1.0, l))?.value)
        }));
        v.push(attempt(&format!("cf.absorbing.flux_limit.L{l}"), &format!("flux-limit force, beta=1, L={l}"), expected, 1e-6, Relative, || {
            Ok(force_absorbing_flux_limit(&absorbing(1.0, l))?.value)
        }));
    }
    for beta in [0.5, 1.0, 2.0] {
        for x in [0.1, 0.5, 1.0] {
            let p = absorbing(beta, 1.0);
            let id = format!("cf.bessel.beta{beta}.x{x}");
            v.push(match flux_outside_bessel(&p, -x) {
                Ok(expected) => attempt(&id, &format!("outside flux quadrature vs Bessel K0, beta={beta}, x=-{x}"), expected, 1e-10, Relative, || {
                    flux_outside(&p, -x)
                }),
                Err(e) => Check::failed(id, e.to_string(), f64::NAN, 1e-10, Relative),
            });
        }
    }
    v
}

fn oracle_checks() -> Vec<Check> {
    let mut v = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        for l in [0.5, 1.0, 2.0] {
            let p = reflecting(beta, l);
            let id = format!("oracle.reflecting.beta{beta}.L{l}");
            let desc = format!("reflecting force vs 1D oracle (4096/8192), beta={beta}, L={l}");
            v.push(match force_reflecting(&p) {
                Ok(f) => attempt(&id, &desc, f.value, 1e-6, Metric::Relative, || Ok(force_reflecting_oracle(&p, 4096)?.value)),
                Err(e) => Check::failed(id, format!("{desc}: {e}"), f64::NAN, 1e-6, Metric::Relative),
            });
        }
    }
    for l in [0.5, 1.0, 2.0] {
        let p = absorbing(1.0, l);
        let theta_form = force_absorbing(&p).map(|f| f.value);
        let limit = force_absorbing_flux_limit(&p).map(|f| f.value);
        let pde = force_absorbing_oracle(&p, default_force_grid(&p)).map(|f| f.value);
        let pairs = [
            ("theta_vs_flux_limit", &theta_form, &limit),
            ("theta_vs_pde", &theta_form, &pde),
            ("flux_limit_vs_pde", &limit, &pde),
        ];
        for (name, a, b) in pairs {
            let id = format!("oracle.absorbing.{name}.L{l}");
            let desc = format!("absorbing force {name}, beta=1, L={l}");
            v.push(match (a, b) {
                (Ok(a), Ok(b)) => Check::new(id, desc, *a, *b, 1e-4, Metric::Relative),
                (Err(e), _) | (_, Err(e)) => Check::failed(id, format!("{desc}: {e}"), f64::NAN, 1e-4, Metric::Relative),
            });
        }
    }
    v
}

fn asymptotic_checks() -> Vec<Check> {
    let mut v = Vec::new();
    let grids = [
        (Boundary::Reflecting, vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 1e-2),
        (Boundary::Absorbing, vec![4.0, 5.0, 6.0, 7.0], 2e-2),
    ];
    for beta in [1.0, 2.0] {
        for (mode, grid, tol) in &grids {
            let p = ModelParams {
                beta,
                length: 1.0,
                boundary: *mode,
            };
            let kappa = match mode {
                Boundary::Reflecting => p.kappa_reflecting(),
                Boundary::Absorbing => p.kappa_absorbing(),
            };
            let p_expected = casimir_core::asymptotics::prefactor_exponent(*mode);
            let tag = format!("asym.{mode}.beta{beta}");
            match fit_decay(*mode, &p, grid) {
                Ok(fit) => {
                    v.push(Check::new(format!("{tag}.slope"), format!("{mode} decay rate, beta={beta}"), kappa, fit.slope, *tol, Metric::Relative));
                    v.push(Check::new(
                        format!("{tag}.free_exponent"),
                        format!("{mode} free power of L, beta={beta}"),
                        p_expected,
                        fit.free_exponent,
                        0.1,
                        Metric::Absolute,
                    ));
                    v.push(Check::new(format!("{tag}.residual"), format!("{mode} log-space residual, beta={beta}"), 0.0, fit.residual, 1e-3, Metric::Absolute));
                }
                Err(e) => v.push(Check::failed(format!("{tag}.slope"), e.to_string(), kappa, *tol, Metric::Relative)),
            }
        }
    }
    for (beta, u, f) in [(1.0, 0.5, 4.0), (0.25, 1.0, 2.0)] {
        let (uc, fc) = saddle_point(beta).unwrap_or((f64::NAN, f64::NAN));
        v.push(Check::new(format!("asym.saddle.beta{beta}.u"), format!("saddle location, beta={beta}"), u, uc, 1e-15, Metric::Relative));
        v.push(Check::new(format!("asym.saddle.beta{beta}.value"), format!("saddle value, beta={beta}"), f, fc, 1e-15, Metric::Relative));
    }
    v
}

fn simulation_checks(seed: u64) -> Vec<Check> {
    let mut v = Vec::new();
    let model = reflecting(1.0, 2.0);
    let run = SimParams::new(model, 0.05, 8.0, 5.0, 25.0, 8, seed)
        .and_then(|p| p.with_parity_intervals(vec![(0.0, 1.0)]))
        .and_then(|p| simulate(&p).map(|e| (p, e)));
    match run {
        Ok((p, est)) => {
            v.push(Check::new("sim.reflecting.parity", "parity of (0, L) at every sample", 1.0, est.parity[0].mean, 0.0, Metric::Absolute));
            let bulk = model.bulk_density();
            v.push(Check::new("sim.reflecting.bulk", "bulk density within 3 sigma", bulk, est.bulk.mean, 3.0 * est.bulk.sigma, Metric::Absolute));
            let vx = parity_reflecting(&model, 1.0).unwrap_or(f64::NAN);
            let m = est.parity[1];
            v.push(Check::new("sim.reflecting.parity_half", "V(L/2) within 3 sigma + 2 eps", vx, m.mean, 3.0 * m.sigma + 2.0 * p.eps, Metric::Absolute));
            let f = force_reflecting(&model).map(|f| f.value).unwrap_or(f64::NAN);
            let raw = est.force_estimate;
            let sigma = raw.uncertainty.unwrap_or(f64::NAN);
            v.push(Check::new("sim.reflecting.force", "force within 3 sigma + eps", f, raw.value, 3.0 * sigma + p.eps, Metric::Absolute));
            let balanced = est.metadata.events.iter().filter(|c| c.balanced()).count();
            v.push(Check::new(
                "sim.reflecting.bookkeeping",
                "replicas with balanced event counts",
                p.replicas as f64,
                balanced as f64,
                0.0,
                Metric::Absolute,
            ));
        }
        Err(e) => v.push(Check::failed("sim.reflecting", e.to_string(), f64::NAN, 0.0, Metric::Absolute)),
    }
    let model = absorbing(1.0, 1.0);
    let run = SimParams::new(model, 0.1, 8.0, 5.0, 25.0, 8, seed).and_then(|p| simulate(&p).map(|e| (p, e)));
    match run {
        Ok((p, est)) => {
            let positive = [est.wall.absorption_outside.mean, est.wall.absorption_inside.mean]
                .iter()
                .filter(|&&r| r > 0.0)
                .count();
            v.push(Check::new("sim.absorbing.rates", "faces with positive absorption rate", 2.0, positive as f64, 0.0, Metric::Absolute));
            let f = force_absorbing(&model).map(|f| f.value).unwrap_or(f64::NAN);
            let raw = est.force_estimate;
            let sigma = raw.uncertainty.unwrap_or(f64::NAN);
            v.push(Check::new("sim.absorbing.force", "absorption-rate force within 3 sigma + eps", f, raw.value, 3.0 * sigma + p.eps, Metric::Absolute));
        }
        Err(e) => v.push(Check::failed("sim.absorbing", e.to_string(), f64::NAN, 0.0, Metric::Absolute)),
    }
    v
}
