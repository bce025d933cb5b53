//! The nine acceptance criteria, each evaluated to a single verdict.
//!
//! Every criterion returns a [`Verdict`] instead of panicking so a runner can
//! report all of them even when one fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Parser;

use casimir_cli::verify::{jacobi_residual, representation_gap, THETA_AT_I};
use casimir_cli::{run, Cli, Outcome};
use casimir_core::asymptotics::{fit_decay, prefactor_exponent};
use casimir_core::closed_form::{
    flux_outside, flux_outside_bessel, force_absorbing, force_absorbing_flux_limit, force_reflecting, parity_reflecting,
    rho_reflecting_inside,
};
use casimir_core::lattice_sim::{force_estimator, simulate, SimEstimate, SimParams};
use casimir_core::pde_oracle::{default_force_grid, force_absorbing_oracle, force_reflecting_oracle};
use casimir_core::special_fn::theta_imag;
use casimir_core::{Boundary, ModelParams, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub criterion: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "criterion {} [{status}] {} ({:.1} s): {}",
            self.criterion,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed(criterion: u8, title: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Verdict {
    let start = Instant::now();
    let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Verdict {
        criterion,
        title,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn all() -> Vec<Verdict> {
    vec![
        reflecting_oracle(),
        absorbing_agreement(),
        representation_equivalence(),
        asymptotic_exponents(),
        special_functions(),
        monte_carlo_reflecting(),
        monte_carlo_trend(),
        scaling_identity(),
        determinism(),
    ]
}

pub fn reflecting_oracle() -> Verdict {
    timed(1, "reflecting force vs 1D oracle", || {
        let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
        for beta in [0.5, 1.0, 2.0] {
            for l in [0.5, 1.0, 2.0] {
                let p = ModelParams::reflecting(beta, l)?;
                let start = Instant::now();
                let oracle = force_reflecting_oracle(&p, 4096)?.value;
                slowest = slowest.max(start.elapsed());
                worst = worst.max(rel(oracle, force_reflecting(&p)?.value));
            }
        }
        let pass = worst < 1e-6 && slowest < Duration::from_secs(1);
        Ok((pass, format!("max rel err {worst:.2e} (< 1e-6), slowest case {:.2} s (< 1 s)", slowest.as_secs_f64())))
    })
}

pub fn absorbing_agreement() -> Verdict {
    timed(2, "absorbing force three-way agreement", || {
        let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
        for l in [0.5, 1.0, 2.0] {
            let p = ModelParams::absorbing(1.0, l)?;
            let start = Instant::now();
            let theta_form = force_absorbing(&p)?.value;
            let limit = force_absorbing_flux_limit(&p)?.value;
            let pde = force_absorbing_oracle(&p, default_force_grid(&p))?.value;
            slowest = slowest.max(start.elapsed());
            worst = worst.max(rel(limit, theta_form)).max(rel(pde, theta_form)).max(rel(pde, limit));
        }
        let pass = worst < 1e-4 && slowest < Duration::from_secs(30);
        Ok((pass, format!("max pairwise rel diff {worst:.2e} (< 1e-4), slowest case {:.2} s (< 30 s)", slowest.as_secs_f64())))
    })
}

pub fn representation_equivalence() -> Verdict {
    timed(3, "inside flux theta form vs Fourier series", || {
        let gap = representation_gap(&ModelParams::absorbing(1.0, 1.0)?)?;
        Ok((gap < 1e-8, format!("max abs gap {gap:.2e} on 10 points (< 1e-8)")))
    })
}

pub fn asymptotic_exponents() -> Verdict {
    timed(4, "asymptotic decay rates", || {
        let cases = [
            (Boundary::Reflecting, vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 1e-2),
            (Boundary::Absorbing, vec![4.0, 5.0, 6.0, 7.0], 2e-2),
        ];
        let mut pass = true;
        let mut parts = Vec::new();
        for beta in [1.0, 2.0] {
            for (mode, grid, tol) in &cases {
                let p = ModelParams::new(beta, 1.0, *mode)?;
                let kappa = match mode {
                    Boundary::Reflecting => p.kappa_reflecting(),
                    Boundary::Absorbing => p.kappa_absorbing(),
                };
                let fit = fit_decay(*mode, &p, grid)?;
                let slope_err = rel(fit.slope, kappa);
                let p_err = (fit.free_exponent - prefactor_exponent(*mode)).abs();
                pass &= slope_err < *tol && p_err < 0.1;
                parts.push(format!("{mode} beta={beta}: kappa err {slope_err:.1e}, free p err {p_err:.2}"));
            }
        }
        Ok((pass, parts.join("; ")))
    })
}

pub fn special_functions() -> Verdict {
    timed(5, "special functions", || {
        let theta_err = (theta_imag(0.0, 1.0) - THETA_AT_I).abs();
        let jacobi = jacobi_residual()?;
        let mut bessel = 0.0f64;
        for beta in [0.5, 1.0, 2.0] {
            let p = ModelParams::absorbing(beta, 1.0)?;
            for x in [0.1, 0.5, 1.0] {
                bessel = bessel.max(rel(flux_outside(&p, -x)?, flux_outside_bessel(&p, -x)?));
            }
        }
        let pass = theta_err < 1e-13 && jacobi < 1e-12 && bessel < 1e-10;
        Ok((
            pass,
            format!("theta(0,i) err {theta_err:.1e} (< 1e-13), Jacobi residual {jacobi:.1e} (< 1e-12), Bessel identity rel err {bessel:.1e} (< 1e-10)"),
        ))
    })
}

fn reflecting_run(l: f64, eps: f64, intervals: Vec<(f64, f64)>) -> Result<(SimParams, SimEstimate)> {
    let p = SimParams::new(ModelParams::reflecting(1.0, l)?, eps, 8.0, 5.0, 50.0, 32, 42)?.with_parity_intervals(intervals)?;
    let est = simulate(&p)?;
    Ok((p, est))
}

pub fn monte_carlo_reflecting() -> Verdict {
    timed(6, "Monte Carlo reflecting wall", || {
        let (p, est) = reflecting_run(2.0, 0.05, vec![(0.0, 1.0)])?;
        let bulk = p.model.bulk_density();
        let bulk_ok = (est.bulk.mean - bulk).abs() <= 3.0 * est.bulk.sigma;
        // A mean of exactly 1 over +-1 samples means every sample was +1.
        let parity = est.parity[0];
        let parity_ok = parity.mean == 1.0 && parity.sigma == 0.0;
        let half = est.parity[1];
        let v = parity_reflecting(&p.model, 1.0)?;
        let half_ok = (half.mean - v).abs() <= 3.0 * half.sigma + 2.0 * p.eps;
        Ok((
            bulk_ok && parity_ok && half_ok,
            format!(
                "bulk {:.4} +- {:.4} vs {bulk:.4}; parity(0,L) mean {} over {} samples; V(L/2) {:.4} +- {:.4} vs {v:.4}",
                est.bulk.mean,
                est.bulk.sigma,
                parity.mean,
                est.metadata.samples_per_replica * p.replicas,
                half.mean,
                half.sigma
            ),
        ))
    })
}

pub fn monte_carlo_trend() -> Verdict {
    timed(7, "Monte Carlo lattice-spacing trend", || {
        let model = ModelParams::reflecting(1.0, 1.0)?;
        let (rho, force) = (rho_reflecting_inside(&model)?, force_reflecting(&model)?.value);
        let mut pass = true;
        let mut previous: Option<f64> = None;
        let mut parts = Vec::new();
        for eps in [0.2, 0.1, 0.05] {
            let (_, est) = reflecting_run(1.0, eps, Vec::new())?;
            let wall = est.wall.rho_inside;
            let err = (wall.mean - rho).abs();
            if let Some(prev) = previous {
                pass &= err <= prev + wall.sigma;
            }
            previous = Some(err);
            let f = force_estimator(&est, Boundary::Reflecting)?;
            let sigma = f.uncertainty.unwrap_or(f64::INFINITY);
            pass &= (f.value - force).abs() <= 3.0 * sigma + eps;
            parts.push(format!("eps={eps}: wall err {err:.4} (sigma {:.4}), force {:.4} +- {sigma:.4}", wall.sigma, f.value));
        }
        parts.push(format!("closed-form force {force:.4}"));
        Ok((pass, parts.join("; ")))
    })
}

/// Ratios `F(4 beta, L/2) / F(beta, L)` for the reflecting and absorbing forces.
pub fn scaling_ratios() -> Result<(f64, f64)> {
    let r = force_reflecting(&ModelParams::reflecting(4.0, 0.5)?)?.value / force_reflecting(&ModelParams::reflecting(1.0, 1.0)?)?.value;
    let a = force_absorbing(&ModelParams::absorbing(4.0, 0.5)?)?.value / force_absorbing(&ModelParams::absorbing(1.0, 1.0)?)?.value;
    Ok((r, a))
}

pub fn scaling_identity() -> Verdict {
    timed(8, "forces scale by 4 under (beta, L) -> (4 beta, L/2)", || {
        let (r, a) = scaling_ratios()?;
        let reflecting_ok = (r - 4.0).abs() <= 4.0 * 4.0 * f64::EPSILON;
        let absorbing_ok = rel(a, 4.0) < 1e-8;
        Ok((
            reflecting_ok && absorbing_ok,
            format!(
                "reflecting ratio {r:.16} (claimed 4, dimensionally 2, err vs 2 {:.1e}); absorbing ratio {a:.12} (rel err vs 4 {:.1e})",
                (r - 2.0).abs(),
                rel(a, 4.0)
            ),
        ))
    })
}

fn run_with_threads(threads: usize, args: &[&str]) -> std::result::Result<Outcome, String> {
    let cli = Cli::try_parse_from(std::iter::once("casimir").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| run(cli)).map_err(|e| e.to_string())
}

fn scratch_dir() -> PathBuf {
    std::env::temp_dir().join(format!("casimir-acceptance-{}", std::process::id()))
}

pub fn determinism() -> Verdict {
    timed(9, "byte-identical output across runs and thread counts", || {
        let dir = scratch_dir();
        let outcome = (|| -> std::result::Result<(bool, String), String> {
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let mut sim_outputs = Vec::new();
            let mut verify_outputs = Vec::new();
            for (k, threads) in [1, 1, 8, 8].into_iter().enumerate() {
                let stem = dir.join(format!("run{k}"));
                let stem = stem.to_str().ok_or("non-UTF-8 temp path")?;
                let sim = [
                    "simulate", "--mode", "reflecting", "--beta", "1", "--L", "1", "--eps", "0.1", "--w-out", "4", "--t-sample", "10",
                    "--replicas", "8", "--seed", "42",
                ];
                let stdout = run_with_threads(threads, &sim)?.stdout;
                let with_out: Vec<&str> = sim.iter().copied().chain(["--out", stem]).collect();
                run_with_threads(threads, &with_out)?;
                let json = std::fs::read(format!("{stem}.json")).map_err(|e| e.to_string())?;
                let csv = std::fs::read(format!("{stem}.csv")).map_err(|e| e.to_string())?;
                sim_outputs.push((stdout, json, csv));
                verify_outputs.push(run_with_threads(threads, &["verify", "--suite", "all", "--seed", "42"])?);
            }
            let sim_same = sim_outputs.windows(2).all(|w| w[0] == w[1]) && sim_outputs[0].0.as_bytes() == sim_outputs[0].1.as_slice();
            let verify_same = verify_outputs.windows(2).all(|w| w[0] == w[1]);
            Ok((
                sim_same && verify_same,
                format!(
                    "simulate json/csv identical: {sim_same}; verify --suite all identical: {verify_same} (overall pass {}); threads 1,1,8,8",
                    verify_outputs[0].success
                ),
            ))
        })();
        let _ = std::fs::remove_dir_all(&dir);
        Ok(outcome.unwrap_or_else(|e| (false, format!("error: {e}"))))
    })
}
