//! Finite-difference solvers for the parity boundary-value problems.
//!
//! Nothing here calls into `closed_form`'s series or theta integrals; the
//! fields are computed from the differential equations alone so they can
//! serve as an independent check.
//!
//! Grids are described by their number of intervals `n` (nodes `0..=n`,
//! spacing `h = L / n`).

use serde::{Deserialize, Serialize};

use crate::closed_form::{density_outside_absorbing, DensityPoint, DensityProfile, Region};
use crate::error::{Error, Result};
use crate::model::{Boundary, ForceResult, Method, ModelParams};

pub const CG_TOL: f64 = 1e-10;
pub const CG_MAX_ITER: usize = 100_000;
/// Outside half-line truncated at this many correlation lengths `1/sqrt(2 beta)`.
const HALFLINE_WIDTH: f64 = 16.0;

/// Single-interval parity `V` on a uniform mesh, `V(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityField1D {
    pub length: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

/// Two-point parity of the skew-symmetric extension on `[0, L]^2`.
///
/// `values[i * (n + 1) + j]` holds `V(i h, j h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityField2D {
    pub length: f64,
    pub n: usize,
    pub h: f64,
    pub beta: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl ParityField2D {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }
}

/// Right-hand side of `(Delta - 4 beta) U = 4 beta s(x, y)` for `U = V - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// `s = sign(y - x)`, zero on the diagonal.
    SignDifference,
    /// `s = 1`.
    Constant,
}

// ------------------------------------------------------------------ 1D

/// Solves `(d^2/dx^2 - 2 beta) V = 0` with `V(0) = V(L) = 1`.
pub fn solve_parity_1d(params: &ModelParams, n: usize) -> Result<ParityField1D> {
    solve_two_point(params.beta, params.length, n, 1.0)
}

/// Solves the same equation on `[0, W]` with `V(0) = 1` and `V(W) = 0`,
/// `W = 16 / sqrt(2 beta)`, standing in for the half-line outside a wall.
/// The truncation changes `V'(0)` by a factor `coth(16) - 1 ~ 2e-14`.
pub fn solve_parity_halfline(params: &ModelParams, n: usize) -> Result<ParityField1D> {
    let width = HALFLINE_WIDTH / params.kappa_reflecting();
    solve_two_point(params.beta, width, n, 0.0)
}

fn solve_two_point(beta: f64, length: f64, n: usize, far: f64) -> Result<ParityField1D> {
    if n < 8 {
        return Err(Error::GridTooCoarse(format!("1D grid needs at least 8 intervals, got {n}")));
    }
    let h = length / n as f64;
    // W = 1 - V: -W_{i-1} + (2 + 2 beta h^2) W_i - W_{i+1} = 2 beta h^2
    let diag = 2.0 + 2.0 * beta * h * h;
    let rhs = 2.0 * beta * h * h;
    let m = n - 1;
    let mut c_prime = vec![0.0; m];
    let mut d_prime = vec![0.0; m];
    for k in 0..m {
        let mut d = rhs;
        if k == m - 1 {
            d += 1.0 - far;
        }
        let denom = if k == 0 { diag } else { diag + c_prime[k - 1] };
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem);
        }
        c_prime[k] = -1.0 / denom;
        d_prime[k] = if k == 0 { d / denom } else { (d + d_prime[k - 1]) / denom };
    }
    // the last row has no super-diagonal; its boundary term is already in d
    c_prime[m - 1] = 0.0;
    let mut w = vec![0.0; n + 1];
    w[n] = 1.0 - far;
    for k in (0..m).rev() {
        w[k + 1] = d_prime[k] - c_prime[k] * w[k + 2];
    }
    Ok(ParityField1D {
        length,
        h,
        values: w.into_iter().map(|v| 1.0 - v).collect(),
    })
}

/// `-V'(0) / 2` from the one-sided second-order stencil.
pub fn wall_density_1d(field: &ParityField1D) -> Result<f64> {
    let v = &field.values;
    if v.len() < 3 {
        return Err(Error::GridTooCoarse("need three nodes for the wall derivative".into()));
    }
    Ok(-0.5 * (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * field.h))
}

/// Reflecting force `rho(0-) - rho(0+)` from 1D solves on `n` and `2n`
/// intervals, each side Richardson-extrapolated.
pub fn force_reflecting_oracle(params: &ModelParams, n: usize) -> Result<ForceResult> {
    if params.boundary != Boundary::Reflecting {
        return Err(Error::WrongMode {
            expected: Boundary::Reflecting,
            got: params.boundary,
        });
    }
    let rich = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    let inside_n = wall_density_1d(&solve_parity_1d(params, n)?)?;
    let inside_2n = wall_density_1d(&solve_parity_1d(params, 2 * n)?)?;
    let out_n = wall_density_1d(&solve_parity_halfline(params, n)?)?;
    let out_2n = wall_density_1d(&solve_parity_halfline(params, 2 * n)?)?;
    let value = rich(out_n, out_2n) - rich(inside_n, inside_2n);
    let unextrapolated = out_2n - inside_2n;
    Ok(ForceResult {
        value,
        mode: Boundary::Reflecting,
        method: Method::PdeOracle,
        uncertainty: Some((value - unextrapolated).abs() / 15.0),
    })
}

// ------------------------------------------------------------------ 2D

/// Edge weights making the ghost-mirror Neumann operator symmetric.
#[inline]
fn edge_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5
    } else {
        1.0
    }
}

struct Level {
    n: usize,
    h: f64,
    shift: f64,
}

impl Level {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }

    fn size(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    #[inline]
    fn neighbours(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let n = self.n;
        let row = |ii: usize| ii * (n + 1);
        let im = if i == 0 { 1 } else { i - 1 };
        let ip = if i == n { n - 1 } else { i + 1 };
        let jm = if j == 0 { 1 } else { j - 1 };
        let jp = if j == n { n - 1 } else { j + 1 };
        u[row(im) + j] + u[row(ip) + j] + u[row(i) + jm] + u[row(i) + jp]
    }

    /// `(-Delta_h + 4 beta) u` with mirror ghosts.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let inv_h2 = 1.0 / (self.h * self.h);
        let diag = 4.0 * inv_h2 + self.shift;
        for i in 0..=self.n {
            for j in 0..=self.n {
                let k = self.idx(i, j);
                out[k] = diag * u[k] - inv_h2 * self.neighbours(u, i, j);
            }
        }
    }

    fn residual(&self, u: &[f64], b: &[f64], r: &mut [f64]) {
        self.apply(u, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    /// One Gauss–Seidel pass over nodes of one colour.
    fn colour_sweep(&self, u: &mut [f64], b: &[f64], colour: usize) {
        let inv_h2 = 1.0 / (self.h * self.h);
        let diag = 4.0 * inv_h2 + self.shift;
        for i in 0..=self.n {
            let start = (i + colour) % 2;
            let mut j = start;
            while j <= self.n {
                let k = self.idx(i, j);
                u[k] = (b[k] + inv_h2 * self.neighbours(u, i, j)) / diag;
                j += 2;
            }
        }
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        edge_weight(i, self.n) * edge_weight(j, self.n)
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..=self.n {
            let wi = edge_weight(i, self.n);
            for j in 0..=self.n {
                let k = self.idx(i, j);
                s += wi * edge_weight(j, self.n) * a[k] * b[k];
            }
        }
        s
    }
}

/// Coarsest level, solved exactly by dense Cholesky of the weighted operator.
struct CoarseSolver {
    level: Level,
    chol: Vec<f64>,
}

impl CoarseSolver {
    fn new(level: Level) -> Result<Self> {
        let m = level.size();
        let mut a = vec![0.0; m * m];
        let mut e = vec![0.0; m];
        let mut col = vec![0.0; m];
        for c in 0..m {
            e.fill(0.0);
            e[c] = 1.0;
            level.apply(&e, &mut col);
            for i in 0..=level.n {
                for j in 0..=level.n {
                    let r = level.idx(i, j);
                    a[r * m + c] = level.weight(i, j) * col[r];
                }
            }
        }
        for j in 0..m {
            let mut d = a[j * m + j];
            for k in 0..j {
                d -= a[j * m + k] * a[j * m + k];
            }
            if !(d > 0.0) {
                return Err(Error::SingularSystem);
            }
            let d = d.sqrt();
            a[j * m + j] = d;
            for i in j + 1..m {
                let mut s = a[i * m + j];
                for k in 0..j {
                    s -= a[i * m + k] * a[j * m + k];
                }
                a[i * m + j] = s / d;
            }
        }
        Ok(CoarseSolver { level, chol: a })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let m = self.level.size();
        let l = &self.chol;
        let mut y = vec![0.0; m];
        for i in 0..=self.level.n {
            for j in 0..=self.level.n {
                let r = self.level.idx(i, j);
                y[r] = self.level.weight(i, j) * b[r];
            }
        }
        for i in 0..m {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * m + k] * y[k];
            }
            y[i] = s / l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = y[i];
            for k in i + 1..m {
                s -= l[k * m + i] * x[k];
            }
            x[i] = s / l[i * m + i];
        }
    }
}

struct Multigrid {
    levels: Vec<Level>,
    coarse: CoarseSolver,
    sweeps: usize,
}

const COARSEST: usize = 8;

impl Multigrid {
    fn new(n: usize, h: f64, shift: f64) -> Result<Self> {
        let mut levels = Vec::new();
        let (mut nn, mut hh) = (n, h);
        while nn > COARSEST && nn % 2 == 0 {
            levels.push(Level { n: nn, h: hh, shift });
            nn /= 2;
            hh *= 2.0;
        }
        let coarse = CoarseSolver::new(Level { n: nn, h: hh, shift })?;
        Ok(Multigrid {
            levels,
            coarse,
            sweeps: 2,
        })
    }

    /// Approximates `A^{-1} b` by one symmetric V-cycle from a zero guess.
    fn vcycle(&self, depth: usize, b: &[f64], x: &mut [f64]) {
        if depth == self.levels.len() {
            self.coarse.solve(b, x);
            return;
        }
        let lvl = &self.levels[depth];
        x.fill(0.0);
        for _ in 0..self.sweeps {
            lvl.colour_sweep(x, b, 0);
            lvl.colour_sweep(x, b, 1);
        }
        let mut r = vec![0.0; lvl.size()];
        lvl.residual(x, b, &mut r);
        let nc = lvl.n / 2;
        let coarse_size = (nc + 1) * (nc + 1);
        let mut rc = vec![0.0; coarse_size];
        restrict(&r, lvl.n, &mut rc);
        let mut ec = vec![0.0; coarse_size];
        self.vcycle(depth + 1, &rc, &mut ec);
        prolong_add(&ec, nc, x);
        for _ in 0..self.sweeps {
            lvl.colour_sweep(x, b, 1);
            lvl.colour_sweep(x, b, 0);
        }
    }
}

/// Interpolation stencil from a fine index to coarse indices.
#[inline]
fn parents(i: usize) -> [(usize, f64); 2] {
    if i.is_multiple_of(2) {
        [(i / 2, 1.0), (i / 2, 0.0)]
    } else {
        [((i - 1) / 2, 0.5), (i.div_ceil(2), 0.5)]
    }
}

/// Full weighting, the weighted adjoint of bilinear interpolation scaled by 1/4.
fn restrict(fine: &[f64], n: usize, coarse: &mut [f64]) {
    let nc = n / 2;
    coarse.fill(0.0);
    for i in 0..=n {
        let wi = edge_weight(i, n);
        for j in 0..=n {
            let v = wi * edge_weight(j, n) * fine[i * (n + 1) + j];
            for (ci, a) in parents(i) {
                if a == 0.0 {
                    continue;
                }
                for (cj, b) in parents(j) {
                    if b == 0.0 {
                        continue;
                    }
                    coarse[ci * (nc + 1) + cj] += a * b * v;
                }
            }
        }
    }
    for i in 0..=nc {
        for j in 0..=nc {
            coarse[i * (nc + 1) + j] *= 0.25 / (edge_weight(i, nc) * edge_weight(j, nc));
        }
    }
}

fn prolong_add(coarse: &[f64], nc: usize, fine: &mut [f64]) {
    let n = 2 * nc;
    for i in 0..=n {
        for j in 0..=n {
            let mut v = 0.0;
            for (ci, a) in parents(i) {
                for (cj, b) in parents(j) {
                    v += a * b * coarse[ci * (nc + 1) + cj];
                }
            }
            fine[i * (n + 1) + j] += v;
        }
    }
}

/// Solves `(Delta - 4 beta) U = 4 beta s(x, y)` on `[0, L]^2` with Neumann
/// edges and returns `V = 1 + U`. `n` intervals per side, a power of two
/// and at least 32.
pub fn solve_parity_2d(params: &ModelParams, n: usize) -> Result<ParityField2D> {
    solve_parity_2d_with(params, n, Forcing::SignDifference)
}

pub fn solve_parity_2d_with(params: &ModelParams, n: usize, forcing: Forcing) -> Result<ParityField2D> {
    if n < 32 || !n.is_power_of_two() {
        return Err(Error::GridTooCoarse(format!(
            "2D grid needs a power of two of at least 32 intervals, got {n}"
        )));
    }
    let beta = params.beta;
    let h = params.length / n as f64;
    let shift = 4.0 * beta;
    let mg = Multigrid::new(n, h, shift)?;
    let top = &mg.levels[0];
    let size = top.size();

    let mut b = vec![0.0; size];
    for i in 0..=n {
        for j in 0..=n {
            let s = match forcing {
                Forcing::SignDifference => (j as f64 - i as f64).signum() * if i == j { 0.0 } else { 1.0 },
                Forcing::Constant => 1.0,
            };
            b[top.idx(i, j)] = -shift * s;
        }
    }

    // preconditioned CG in the edge-weighted inner product
    let mut u = vec![0.0; size];
    let mut r = b.clone();
    let mut z = vec![0.0; size];
    let mut q = vec![0.0; size];
    let b_norm = top.dot(&b, &b).sqrt();
    if b_norm == 0.0 {
        return Ok(field_from(params, n, h, u, 0, 0.0));
    }
    mg.vcycle(0, &r, &mut z);
    let mut p = z.clone();
    let mut rz = top.dot(&r, &z);
    let mut residual = 1.0;
    for it in 1..=CG_MAX_ITER {
        top.apply(&p, &mut q);
        let alpha = rz / top.dot(&p, &q);
        for k in 0..size {
            u[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        residual = top.dot(&r, &r).sqrt() / b_norm;
        if residual < CG_TOL {
            return Ok(field_from(params, n, h, u, it, residual));
        }
        mg.vcycle(0, &r, &mut z);
        let rz_new = top.dot(&r, &z);
        let gamma = rz_new / rz;
        rz = rz_new;
        for k in 0..size {
            p[k] = z[k] + gamma * p[k];
        }
    }
    Err(Error::IterationLimitExceeded {
        iterations: CG_MAX_ITER,
        residual,
    })
}

fn field_from(params: &ModelParams, n: usize, h: f64, u: Vec<f64>, iterations: usize, residual: f64) -> ParityField2D {
    ParityField2D {
        length: params.length,
        n,
        h,
        beta: params.beta,
        values: u.into_iter().map(|v| 1.0 + v).collect(),
        iterations,
        residual,
    }
}

/// `rho(x) = -1/2 dV/dy` at `y = x+` for the node `x = i h`, one-sided from
/// inside the wedge `x < y`. Near `x = L` the equivalent `+1/2 dV/dx` at
/// `x = y-` is used so the stencil stays on the grid.
pub fn density_at_node(field: &ParityField2D, i: usize) -> Result<f64> {
    let n = field.n;
    if i > n {
        return Err(Error::OutOfDomain(format!("node {i} beyond grid of {n} intervals")));
    }
    if i == 0 || i == n {
        return Ok(0.0);
    }
    let h = field.h;
    let v = |a: usize, b: usize| field.at(a, b);
    let rho = if i < n / 2 {
        -0.5 * (-3.0 * v(i, i) + 4.0 * v(i, i + 1) - v(i, i + 2)) / (2.0 * h)
    } else {
        0.5 * (3.0 * v(i, i) - 4.0 * v(i - 1, i) + v(i - 2, i)) / (2.0 * h)
    };
    Ok(rho)
}

/// Parity field handed to [`density_from_parity`].
pub enum SolvedField<'a> {
    OneD(&'a ParityField1D),
    TwoD(&'a ParityField2D),
}

/// Density read off a solved parity field.
///
/// One-dimensional fields yield the wall density `-V'(0)/2`, reported at
/// `x = 0` (inside, reflecting mode). Two-dimensional fields yield the inside
/// absorbing profile at every node.
pub fn density_from_parity(field: SolvedField<'_>, mode: Boundary) -> Result<DensityProfile> {
    match field {
        SolvedField::OneD(f) => {
            if f.values.len() < 9 {
                return Err(Error::GridTooCoarse("1D field needs at least 8 intervals".into()));
            }
            Ok(DensityProfile {
                mode,
                region: Region::Inside,
                points: vec![DensityPoint {
                    x: 0.0,
                    rho: wall_density_1d(f)?,
                    sigma: 0.0,
                }],
            })
        }
        SolvedField::TwoD(f) => {
            if f.n < 4 {
                return Err(Error::GridTooCoarse("2D field needs at least 4 intervals".into()));
            }
            let points = (0..=f.n)
                .map(|i| {
                    Ok(DensityPoint {
                        x: i as f64 * f.h,
                        rho: density_at_node(f, i)?,
                        sigma: 0.0,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DensityProfile {
                mode,
                region: Region::Inside,
                points,
            })
        }
    }
}

/// Richardson-extrapolated inside absorbing density at positions that are
/// nodes of the coarser grid.
pub fn density_inside_richardson(coarse: &ParityField2D, fine: &ParityField2D, xs: &[f64]) -> Result<Vec<f64>> {
    if fine.n != 2 * coarse.n {
        return Err(Error::InvalidInput("fine grid must have twice the intervals".into()));
    }
    xs.iter()
        .map(|&x| {
            let k = x / coarse.h;
            let i = k.round();
            if (k - i).abs() > 1e-9 {
                return Err(Error::OutOfDomain(format!("x = {x} is not a node of the coarse grid")));
            }
            let i = i as usize;
            let a = density_at_node(coarse, i)?;
            let b = density_at_node(fine, 2 * i)?;
            Ok((4.0 * b - a) / 3.0)
        })
        .collect()
}

/// Coarse grid of the Richardson pair used by [`force_absorbing_oracle`]:
/// spacing near `1 / (512 sqrt(beta))`, so 512 intervals at `L sqrt(beta) = 1`.
pub fn default_force_grid(params: &ModelParams) -> usize {
    let target = (512.0 * params.length * params.beta.sqrt()).ceil() as usize;
    target.next_power_of_two().clamp(64, 4096)
}

/// Absorbing force reconstructed from the 2D field.
///
/// The flux difference integrates to `rho(-x) - rho(x) = F x + O(x^3)`, so
/// `[rho(-x) - rho(x)] / x` is fitted by `F + a x^2 + b x^4` through three
/// node-aligned points `x_max {1, 1/2, 1/4}`. The inside density comes from
/// the Richardson pair (`n`, `2n`); the outside density from the half-line
/// erf integral.
pub fn force_absorbing_oracle(params: &ModelParams, n: usize) -> Result<ForceResult> {
    if params.boundary != Boundary::Absorbing {
        return Err(Error::WrongMode {
            expected: Boundary::Absorbing,
            got: params.boundary,
        });
    }
    let limit = 0.25 / params.beta.sqrt();
    let mut k = 2;
    while params.length / f64::from(1u32 << k) > limit {
        k += 1;
        if k > 20 {
            return Err(Error::GridTooCoarse("wall separation too large for the grid".into()));
        }
    }
    let x_max = params.length / f64::from(1u32 << k);
    if ((x_max / 4.0) / (params.length / n as f64)) < 2.0 {
        return Err(Error::GridTooCoarse(format!("{n} intervals cannot resolve x = {}", x_max / 4.0)));
    }
    let coarse = solve_parity_2d(params, n)?;
    let fine = solve_parity_2d(params, 2 * n)?;
    let xs = [x_max, 0.5 * x_max, 0.25 * x_max];
    let inside = density_inside_richardson(&coarse, &fine, &xs)?;
    let g = |idx: usize| -> Result<f64> {
        let x = xs[idx];
        Ok((density_outside_absorbing(params, -x)? - inside[idx]) / x)
    };
    let (g0, g1, g2) = (g(0)?, g(1)?, g(2)?);
    // quadratic in s = x^2 through (s0, g0), (s0/4, g1), (s0/16, g2), evaluated at s = 0
    let value = (g0 - 20.0 * g1 + 64.0 * g2) / 45.0;
    let linear = (4.0 * g2 - g1) / 3.0;
    Ok(ForceResult {
        value,
        mode: Boundary::Absorbing,
        method: Method::PdeOracle,
        uncertainty: Some((value - linear).abs()),
    })
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

    fn exact_parity(beta: f64, l: f64, x: f64) -> f64 {
        let k = (2.0 * beta).sqrt();
        ((k * x).sinh() + (k * (l - x)).sinh()) / (k * l).sinh()
    }

    #[test]
    fn one_d_matches_exact_solution() {
        let (beta, l, n) = (1.0, 2.0, 256);
        let f = solve_parity_1d(&refl(beta, l), n).unwrap();
        let g = solve_parity_1d(&refl(beta, l), 2 * n).unwrap();
        for i in 1..n {
            let x = i as f64 * f.h;
            let exact = exact_parity(beta, l, x);
            assert!((f.values[i] - exact).abs() < 2.0 * beta * f.h * f.h);
            let rich = (4.0 * g.values[2 * i] - f.values[i]) / 3.0;
            assert!((rich - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn halfline_matches_discrete_exponential() {
        // the discrete solution is lambda^i with lambda + 1/lambda = 2 + 2 beta h^2, up to the far end
        let p = refl(1.0, 1.0);
        let f = solve_parity_halfline(&p, 1024).unwrap();
        let c = 1.0 + f.h * f.h;
        let lambda = c - (c * c - 1.0).sqrt();
        for i in 0..200 {
            assert!((f.values[i] - lambda.powi(i as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn one_d_symmetric_and_bounded() {
        let f = solve_parity_1d(&refl(0.7, 3.0), 300).unwrap();
        let n = f.values.len() - 1;
        for i in 0..=n {
            assert!((f.values[i] - f.values[n - i]).abs() < 1e-14);
            assert!(f.values[i] > 0.0 && f.values[i] <= 1.0);
        }
        assert_eq!(f.values[0], 1.0);
        assert_eq!(f.values[n], 1.0);
    }

    #[test]
    fn one_d_vanishing_beta_is_flat() {
        let f = solve_parity_1d(&refl(1e-12, 1.0), 64).unwrap();
        assert!(f.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn one_d_rejects_tiny_grid() {
        assert!(matches!(solve_parity_1d(&refl(1.0, 1.0), 4), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn one_d_wall_density_converges_at_second_order() {
        let p = refl(1.0, 1.0);
        let k = 2f64.sqrt();
        let exact = 0.5 * k * (k * 0.5).tanh();
        let err = |n: usize| wall_density_1d(&solve_parity_1d(&p, n).unwrap()).unwrap() - exact;
        let ratio = err(64) / err(128);
        assert!((3.3..=4.7).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn reflecting_force_oracle() {
        let p = refl(1.0, 1.0);
        let f = force_reflecting_oracle(&p, 4096).unwrap();
        let k = 2f64.sqrt();
        let exact = 0.5f64.sqrt() * 2.0 * (-k).exp() / (1.0 + (-k).exp());
        assert_relative_eq!(f.value, exact, max_relative = 1e-8);
    }

    #[test]
    fn constant_forcing_gives_minus_one() {
        // (Delta - 4 beta) U = 4 beta with Neumann edges is solved by U = -1
        let f = solve_parity_2d_with(&abs(1.3, 0.7), 32, Forcing::Constant).unwrap();
        assert!(f.values.iter().all(|&v| (v - 1.0 + 1.0).abs() < 1e-8), "{}", f.values[0]);
    }

    #[test]
    fn two_d_antisymmetric_about_diagonal() {
        let f = solve_parity_2d(&abs(1.0, 1.0), 64).unwrap();
        assert!(f.residual < CG_TOL);
        for i in 0..=64 {
            assert!((f.at(i, i) - 1.0).abs() < 1e-9);
            for j in 0..=64 {
                let u = f.at(i, j) - 1.0;
                let w = f.at(j, i) - 1.0;
                assert!((u + w).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn two_d_neumann_edges() {
        let f = solve_parity_2d(&abs(1.0, 1.0), 128).unwrap();
        let g = solve_parity_2d(&abs(1.0, 1.0), 256).unwrap();
        // one-sided second-order normal derivative on the edge x = 0 at y = L/2
        let d = |fld: &ParityField2D, j: usize| (-3.0 * fld.at(0, j) + 4.0 * fld.at(1, j) - fld.at(2, j)) / (2.0 * fld.h);
        let a = d(&f, 64).abs();
        let b = d(&g, 128).abs();
        assert!(b < a && b < 1e-3, "{a} {b}");
    }

    #[test]
    fn two_d_rejects_bad_grid() {
        assert!(solve_parity_2d(&abs(1.0, 1.0), 16).is_err());
        assert!(solve_parity_2d(&abs(1.0, 1.0), 96).is_err());
    }

    #[test]
    fn restriction_preserves_constants() {
        let n = 16;
        let fine = vec![1.0; (n + 1) * (n + 1)];
        let mut coarse = vec![0.0; (n / 2 + 1) * (n / 2 + 1)];
        restrict(&fine, n, &mut coarse);
        assert!(coarse.iter().all(|&c| (c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn density_from_one_d_field() {
        let p = refl(1.0, 1.0);
        let prof = density_from_parity(SolvedField::OneD(&solve_parity_1d(&p, 512).unwrap()), Boundary::Reflecting).unwrap();
        let k = 2f64.sqrt();
        assert!((prof.points[0].rho - 0.5 * k * (0.5 * k).tanh()).abs() < 1e-5);
    }

    #[test]
    fn absorbing_wall_density_vanishes() {
        let f = solve_parity_2d(&abs(1.0, 1.0), 32).unwrap();
        let prof = density_from_parity(SolvedField::TwoD(&f), Boundary::Absorbing).unwrap();
        assert_eq!(prof.points[0].rho, 0.0);
        assert_eq!(prof.points[32].rho, 0.0);
        assert!(prof.points[16].rho > 0.0);
    }
}
