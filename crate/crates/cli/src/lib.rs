//! Command-line front end: forces, sweeps, density profiles, simulations and
//! the verification suite. Structured results are JSON, tables are CSV.

pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use casimir_core::closed_form::{self, Region};
use casimir_core::lattice_sim::{self, SimParams};
use casimir_core::{pde_oracle, Boundary, ForceResult, Method, ModelParams};

/// Environment variable selecting the worker-thread count.
pub const THREADS_ENV: &str = "CASIMIR_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Model(#[from] casimir_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        use casimir_core::Error as E;
        match self {
            CliError::BadInput(_) => 2,
            CliError::Model(e) => match e {
                E::NonPositiveBeta(_)
                | E::NonPositiveL(_)
                | E::WrongMode { .. }
                | E::OutOfDomain(_)
                | E::InvalidInput(_)
                | E::TauNotInUpperHalfPlane(_)
                | E::InvalidGeometry(_) => 2,
                _ => 3,
            },
            CliError::Io { .. } => 4,
            CliError::Json(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Stochastic Casimir forces between walls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Force on the wall at 0, printed as JSON.
    Force(ForceArgs),
    /// Force over a grid of separations, written as CSV.
    Sweep(SweepArgs),
    /// Closed-form density inside and outside, written as CSV.
    Density(DensityArgs),
    /// Lattice Monte Carlo run, JSON estimate plus CSV density.
    Simulate(SimulateArgs),
    /// Verification suite, JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Reflecting,
    Absorbing,
}

impl From<ModeArg> for Boundary {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Reflecting => Boundary::Reflecting,
            ModeArg::Absorbing => Boundary::Absorbing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Oracle,
    FluxLimit,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ForceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub length: f64,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: MethodArg,
    /// Largest accepted relative uncertainty of the result.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub l_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub l_max: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: MethodArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub length: f64,
    /// Points per region, walls included.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Width of the outside region; defaults to ten correlation lengths.
    #[arg(long)]
    pub w_out: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub length: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 8.0)]
    pub w_out: f64,
    /// Macroscopic burn-in; defaults to 10 / (2 beta).
    #[arg(long)]
    pub t_burn: Option<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub t_sample: f64,
    #[arg(long, default_value_t = 32)]
    pub replicas: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Macroscopic time between samples; defaults to 4 eps^2.
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Writes `<out>.json` and `<out>.csv`; without it the JSON goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    ClosedForm,
    Oracle,
    Asymptotics,
    Simulation,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Text for stdout and whether the command succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub success: bool,
}

/// Builds the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::BadInput(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::BadInput(format!("cannot configure {n} threads: {e}")))
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Force(a) => cmd_force(&a).map(ok),
        Command::Sweep(a) => cmd_sweep(&a).map(ok),
        Command::Density(a) => cmd_density(&a).map(ok),
        Command::Simulate(a) => cmd_simulate(&a).map(ok),
        Command::Verify(a) => {
            let report = verify::run_suite(a.suite, a.seed);
            Ok(Outcome {
                stdout: serde_json::to_string_pretty(&report)? + "\n",
                success: report.overall,
            })
        }
    }
}

fn ok(stdout: String) -> Outcome {
    Outcome { stdout, success: true }
}

#[derive(Debug, Serialize)]
struct ForceOutput {
    mode: Boundary,
    beta: f64,
    #[serde(rename = "L")]
    length: f64,
    method: Method,
    value: f64,
    uncertainty: Option<f64>,
}

pub fn compute_force(params: &ModelParams, method: MethodArg) -> Result<ForceResult> {
    let f = match (method, params.boundary) {
        (MethodArg::Closed, Boundary::Reflecting) => closed_form::force_reflecting(params)?,
        (MethodArg::Closed, Boundary::Absorbing) => closed_form::force_absorbing(params)?,
        (MethodArg::Oracle, Boundary::Reflecting) => pde_oracle::force_reflecting_oracle(params, 4096)?,
        (MethodArg::Oracle, Boundary::Absorbing) => {
            pde_oracle::force_absorbing_oracle(params, pde_oracle::default_force_grid(params))?
        }
        (MethodArg::FluxLimit, Boundary::Absorbing) => closed_form::force_absorbing_flux_limit(params)?,
        (MethodArg::FluxLimit, Boundary::Reflecting) => {
            return Err(CliError::BadInput("the flux-limit method needs absorbing walls".into()))
        }
    };
    if !f.value.is_finite() {
        return Err(casimir_core::Error::InvalidInput(format!("non-finite force {}", f.value)).into());
    }
    Ok(f)
}

fn model(args: &ModelArgs, length: f64) -> Result<ModelParams> {
    Ok(ModelParams::new(args.beta, length, args.mode.into())?)
}

pub fn cmd_force(args: &ForceArgs) -> Result<String> {
    let params = model(&args.model, args.length)?;
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::BadInput(format!("--tol must be positive, got {tol}")));
        }
    }
    let f = compute_force(&params, args.method)?;
    if let (Some(tol), Some(u)) = (args.tol, f.uncertainty) {
        if u > tol * f.value.abs() {
            return Err(casimir_core::Error::ToleranceNotReached {
                value: f.value,
                error: u,
            }
            .into());
        }
    }
    let out = ForceOutput {
        mode: params.boundary,
        beta: params.beta,
        length: params.length,
        method: f.method,
        value: f.value,
        uncertainty: f.uncertainty,
    };
    Ok(serde_json::to_string_pretty(&out)? + "\n")
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    let base = model(&args.model, args.l_min.max(f64::MIN_POSITIVE))?;
    if !(args.l_min > 0.0 && args.l_min < args.l_max && args.l_max.is_finite()) {
        return Err(CliError::BadInput(format!(
            "need 0 < L_min < L_max, got {} and {}",
            args.l_min, args.l_max
        )));
    }
    if args.points < 2 {
        return Err(CliError::BadInput(format!("need at least 2 points, got {}", args.points)));
    }
    let step = (args.l_max - args.l_min) / (args.points - 1) as f64;
    let lengths: Vec<f64> = (0..args.points)
        .map(|i| if i + 1 == args.points { args.l_max } else { args.l_min + step * i as f64 })
        .collect();
    let rows = lengths
        .par_iter()
        .map(|&l| compute_force(&base.with_length(l)?, args.method).map(|f| (l, f)))
        .collect::<Result<Vec<_>>>()?;
    let table = output::sweep_csv(&rows, base.beta);
    write_file(&args.out, &table)?;
    Ok(format!("wrote {} rows to {}\n", rows.len(), args.out.display()))
}

pub fn cmd_density(args: &DensityArgs) -> Result<String> {
    let params = model(&args.model, args.length)?;
    if args.grid < 2 {
        return Err(CliError::BadInput(format!("need at least 2 grid points, got {}", args.grid)));
    }
    let w = args.w_out.unwrap_or(10.0 / params.kappa_reflecting());
    if !(w.is_finite() && w > 0.0) {
        return Err(CliError::BadInput(format!("--w-out must be positive, got {w}")));
    }
    let n = args.grid - 1;
    let outside: Vec<f64> = (0..=n).map(|k| if k == n { 0.0 } else { -w + w * k as f64 / n as f64 }).collect();
    let inside: Vec<f64> = (0..=n)
        .map(|k| if k == n { params.length } else { params.length * k as f64 / n as f64 })
        .collect();
    let profiles = [Region::Outside, Region::Inside]
        .par_iter()
        .map(|&region| {
            let xs = if region == Region::Outside { &outside } else { &inside };
            closed_form::density_profile(&params, region, xs)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let table = output::density_csv(&profiles);
    write_file(&args.out, &table)?;
    Ok(format!("wrote {} rows to {}\n", 2 * (n + 1), args.out.display()))
}

pub fn sim_params(args: &SimulateArgs) -> Result<SimParams> {
    let params = model(&args.model, args.length)?;
    let t_burn = args.t_burn.unwrap_or_else(|| lattice_sim::default_burn_in(params.beta));
    let mut p = SimParams::new(params, args.eps, args.w_out, t_burn, args.t_sample, args.replicas, args.seed)?;
    if let Some(dt) = args.sample_interval {
        p = p.with_sample_interval(dt)?;
    }
    Ok(p)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let p = sim_params(args)?;
    let estimate = lattice_sim::simulate(&p)?;
    let json = serde_json::to_string_pretty(&output::SimulationRecord {
        params: &p,
        estimate: &estimate,
    })? + "\n";
    match &args.out {
        Some(stem) => {
            let json_path = with_suffix(stem, "json");
            let csv_path = with_suffix(stem, "csv");
            write_file(&json_path, &json)?;
            write_file(&csv_path, &output::simulation_csv(&estimate))?;
            Ok(format!("wrote {} and {}\n", json_path.display(), csv_path.display()))
        }
        None => Ok(json),
    }
}

fn with_suffix(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
