//! Large-separation decay of the closed-form forces and the saddle point of
//! the Laplace integral behind the absorbing asymptotics.

use serde::{Deserialize, Serialize};

use crate::closed_form::{force_absorbing, force_reflecting};
use crate::error::{Error, Result};
use crate::model::{Boundary, ModelParams};

/// Smallest closed-form force that is still fitted in log space.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Smallest `L sqrt(2 beta)` accepted by [`fit_decay`].
pub const ASYMPTOTIC_ONSET: f64 = 3.0;

/// Power of `L` multiplying the exponential: `0` for reflecting walls,
/// `-1/2` for absorbing walls.
pub fn prefactor_exponent(mode: Boundary) -> f64 {
    match mode {
        Boundary::Reflecting => 0.0,
        Boundary::Absorbing => -0.5,
    }
}

/// Least-squares fit of `log F(L) = a - kappa L + p log L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub mode: Boundary,
    pub beta: f64,
    #[serde(rename = "L_grid")]
    pub l_grid: Vec<f64>,
    /// Fitted decay rate `kappa` with `p` held at [`prefactor_exponent`].
    pub slope: f64,
    pub prefactor_exponent: f64,
    /// Fitted `exp(a)`, the empirical constant of the decay law.
    pub constant: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
    /// Decay rate and exponent when `p` is fitted as well.
    pub free_slope: f64,
    pub free_exponent: f64,
}

fn closed_force(params: &ModelParams) -> Result<f64> {
    let f = match params.boundary {
        Boundary::Reflecting => force_reflecting(params)?,
        Boundary::Absorbing => force_absorbing(params)?,
    };
    Ok(f.value)
}

/// Solves the normal equations of `y ~ sum_j c_j x_j` by Gaussian
/// elimination with partial pivoting.
fn least_squares<const N: usize>(rows: &[[f64; N]], y: &[f64]) -> Result<[f64; N]> {
    let mut a = [[0.0; N]; N];
    let mut b = [0.0; N];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..N {
            b[i] += row[i] * yi;
            for j in 0..N {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Fits the exponential decay of the closed-form force over `l_grid`.
///
/// `params.length` is ignored; `params.boundary` selects the force.
pub fn fit_decay(mode: Boundary, params: &ModelParams, l_grid: &[f64]) -> Result<AsymptoticFit> {
    let base = params.with_boundary(mode);
    if l_grid.len() < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 separations, got {}", l_grid.len())));
    }
    if l_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("separations must be strictly increasing".into()));
    }
    let onset = ASYMPTOTIC_ONSET / base.kappa_reflecting();
    if let Some(&l) = l_grid.iter().find(|&&l| l < onset) {
        return Err(Error::OutOfDomain(format!(
            "L = {l} is below the asymptotic onset L sqrt(2 beta) = {ASYMPTOTIC_ONSET}"
        )));
    }
    let mut logs = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let f = closed_force(&base.with_length(l)?)?;
        if !(f > UNDERFLOW_FLOOR) {
            return Err(Error::ForceUnderflow(l));
        }
        logs.push(f.ln());
    }

    let p = prefactor_exponent(mode);
    let rows: Vec<[f64; 2]> = l_grid.iter().map(|&l| [1.0, -l]).collect();
    let y: Vec<f64> = l_grid.iter().zip(&logs).map(|(&l, &lf)| lf - p * l.ln()).collect();
    let [a, kappa] = least_squares(&rows, &y)?;
    let ss: f64 = rows.iter().zip(&y).map(|(r, &yi)| (yi - a - kappa * r[1]).powi(2)).sum();

    let free_rows: Vec<[f64; 3]> = l_grid.iter().map(|&l| [1.0, -l, l.ln()]).collect();
    let [_, free_kappa, free_p] = least_squares(&free_rows, &logs)?;

    Ok(AsymptoticFit {
        mode,
        beta: base.beta,
        l_grid: l_grid.to_vec(),
        slope: kappa,
        prefactor_exponent: p,
        constant: a.exp(),
        residual: ss,
        free_slope: free_kappa,
        free_exponent: free_p,
    })
}

/// Minimiser `u_c = 1 / sqrt(4 beta)` of `F(u) = 4 beta u + 1/u` and the
/// minimum `F(u_c) = 4 sqrt(beta)`.
pub fn saddle_point(beta: f64) -> Result<(f64, f64)> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::NonPositiveBeta(beta));
    }
    let u = 1.0 / (4.0 * beta).sqrt();
    Ok((u, 4.0 * beta * u + 1.0 / u))
}
