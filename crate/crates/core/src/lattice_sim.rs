//! Exact continuous-time Monte Carlo for annihilating random walks with
//! pairwise immigration on a cell-centred lattice of spacing `eps`.
//!
//! The simulated domain is an outside segment `[-W, 0]` (reflecting far end)
//! and an inside segment `[0, L]`, separated by the wall at `0`; a second wall
//! sits at `L`. Every bond carries a right jump and a left jump at rate 1 and
//! an immigration event at rate `beta eps^2` in microscopic time, so one unit
//! of macroscopic time is `eps^-2` microscopic units. Occupancies add mod 2.
//!
//! All bonds, including the wall and end bonds, carry the same total rate;
//! events that a wall forbids are dropped. The total rate is therefore state
//! independent and the number of events between two sampling times is
//! Poisson distributed, which removes any time-discretisation bias.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{DensityPoint, DensityProfile, Region};
use crate::error::{Error, Result};
use crate::model::{Boundary, ForceResult, Method, ModelParams};

/// Smallest number of batches used for batch-mean standard errors.
pub const MIN_BATCHES: usize = 20;
/// Cap on the expected number of events of a single replica.
pub const MAX_EVENTS: u64 = 1 << 40;
/// Minimum number of sites on each side of the wall at `0`.
pub const MIN_SITES: usize = 4;
/// Largest relative standard error accepted by [`force_estimator`].
pub const MAX_FORCE_REL_ERROR: f64 = 0.5;

/// Burn-in default, ten relaxation times `1 / (2 beta)`.
pub fn default_burn_in(beta: f64) -> f64 {
    10.0 / (2.0 * beta)
}

/// Smallest admissible burn-in, `5 / (2 beta)`.
pub fn min_burn_in(beta: f64) -> f64 {
    5.0 / (2.0 * beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub model: ModelParams,
    /// Lattice spacing after adjustment to `L / n_in`.
    pub eps: f64,
    pub requested_eps: f64,
    /// Outside width after adjustment to `n_out eps`.
    pub w_out: f64,
    pub requested_w_out: f64,
    pub n_in: usize,
    pub n_out: usize,
    pub t_burn: f64,
    pub t_sample: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Macroscopic time between samples.
    pub sample_interval: f64,
    /// Batches per replica.
    pub batches: usize,
    /// Extra intervals `(a, b)` whose parity is recorded; `(0, L)` is always recorded.
    pub parity_intervals: Vec<(f64, f64)>,
}

impl SimParams {
    /// Rounds `L / eps` and `W / eps` to site counts and rescales `eps` and
    /// `W` so both segments hold a whole number of cells.
    pub fn new(
        model: ModelParams,
        eps: f64,
        w_out: f64,
        t_burn: f64,
        t_sample: f64,
        replicas: usize,
        seed: u64,
    ) -> Result<Self> {
        let model = crate::model::validate(model)?;
        for (name, v) in [("eps", eps), ("W_out", w_out), ("t_burn", t_burn), ("t_sample", t_sample)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if replicas == 0 {
            return Err(Error::InvalidInput("at least one replica is required".into()));
        }
        if t_burn < min_burn_in(model.beta) {
            return Err(Error::InvalidInput(format!(
                "t_burn = {t_burn} is below the relaxation floor 5/(2 beta) = {}",
                min_burn_in(model.beta)
            )));
        }
        let n_in = (model.length / eps).round();
        if !(n_in >= MIN_SITES as f64 && n_in < u32::MAX as f64) {
            return Err(Error::InvalidGeometry(format!(
                "L / eps = {} must round to at least {MIN_SITES} sites",
                model.length / eps
            )));
        }
        let adjusted = model.length / n_in;
        let n_out = (w_out / adjusted).round();
        if !(n_out >= MIN_SITES as f64 && n_out < u32::MAX as f64) {
            return Err(Error::InvalidGeometry(format!(
                "W_out / eps = {} must round to at least {MIN_SITES} sites",
                w_out / adjusted
            )));
        }
        Ok(SimParams {
            model,
            eps: adjusted,
            requested_eps: eps,
            w_out: n_out * adjusted,
            requested_w_out: w_out,
            n_in: n_in as usize,
            n_out: n_out as usize,
            t_burn,
            t_sample,
            replicas,
            seed,
            sample_interval: 4.0 * adjusted * adjusted,
            batches: MIN_BATCHES,
            parity_intervals: Vec::new(),
        })
    }

    pub fn with_sample_interval(mut self, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("sample interval must be positive, got {dt}")));
        }
        self.sample_interval = dt;
        Ok(self)
    }

    pub fn with_batches(mut self, batches: usize) -> Result<Self> {
        if batches < MIN_BATCHES {
            return Err(Error::InvalidInput(format!("need at least {MIN_BATCHES} batches, got {batches}")));
        }
        self.batches = batches;
        Ok(self)
    }

    pub fn with_parity_intervals(mut self, intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            self.check_interval(a, b)?;
        }
        self.parity_intervals = intervals;
        Ok(self)
    }

    pub fn sites(&self) -> usize {
        self.n_out + self.n_in
    }

    /// Immigration rate per bond in microscopic time, `beta eps^2`.
    pub fn immigration_rate(&self) -> f64 {
        self.model.beta * self.eps * self.eps
    }

    /// Total event rate in microscopic time over all `sites + 1` bond slots.
    pub fn total_rate(&self) -> f64 {
        (self.sites() + 1) as f64 * (2.0 + self.immigration_rate())
    }

    /// Samples per batch, at least one, so that `batches * per_batch`
    /// samples cover `t_sample`.
    pub fn samples_per_batch(&self) -> usize {
        ((self.t_sample / self.sample_interval / self.batches as f64).round() as usize).max(1)
    }

    /// Sampling interval actually used, `t_sample / (batches * per_batch)`.
    pub fn effective_sample_interval(&self) -> f64 {
        self.t_sample / (self.batches * self.samples_per_batch()) as f64
    }

    pub fn expected_events(&self) -> f64 {
        self.total_rate() * (self.t_burn + self.t_sample) / (self.eps * self.eps)
    }

    fn check_interval(&self, a: f64, b: f64) -> Result<()> {
        let lo = -self.w_out * (1.0 + 1e-12);
        let hi = self.model.length * (1.0 + 1e-12);
        if !(a.is_finite() && b.is_finite() && a <= b && a >= lo && b <= hi) {
            return Err(Error::OutOfDomain(format!(
                "interval ({a}, {b}) is not inside [{}, {}]",
                -self.w_out, self.model.length
            )));
        }
        Ok(())
    }
}

/// Occupancies of the outside and inside segments.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyLattice {
    pub eps: f64,
    pub n_out: usize,
    pub n_in: usize,
    pub boundary: Boundary,
    /// Site `i` sits at `-W + (i + 1/2) eps`; the first `n_out` sites are outside.
    pub sites: Vec<u8>,
    /// Microscopic time.
    pub clock: f64,
}

impl OccupancyLattice {
    pub fn empty(params: &SimParams) -> Self {
        OccupancyLattice {
            eps: params.eps,
            n_out: params.n_out,
            n_in: params.n_in,
            boundary: params.model.boundary,
            sites: vec![0; params.sites()],
            clock: 0.0,
        }
    }

    pub fn w_out(&self) -> f64 {
        self.n_out as f64 * self.eps
    }

    pub fn length(&self) -> f64 {
        self.n_in as f64 * self.eps
    }

    pub fn position(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.eps - self.w_out()
    }

    pub fn particles(&self) -> u64 {
        self.sites.iter().map(|&s| u64::from(s)).sum()
    }

    /// Half-open index range of the sites whose centres lie in `(a, b)`.
    pub fn site_range(&self, a: f64, b: f64) -> Result<std::ops::Range<usize>> {
        let (w, l) = (self.w_out(), self.length());
        if !(a.is_finite() && b.is_finite() && a <= b && a >= -w * (1.0 + 1e-12) && b <= l * (1.0 + 1e-12)) {
            return Err(Error::OutOfDomain(format!("interval ({a}, {b}) is not inside [{}, {l}]", -w)));
        }
        let n = self.sites.len() as f64;
        let lo = (((a + w) / self.eps - 0.5).floor() + 1.0).clamp(0.0, n) as usize;
        let hi = ((b + w) / self.eps - 0.5).ceil().clamp(0.0, n) as usize;
        Ok(lo..hi.max(lo))
    }

    /// Number of particles strictly inside `(a, b)`.
    pub fn count(&self, a: f64, b: f64) -> Result<u64> {
        Ok(self.sites[self.site_range(a, b)?].iter().map(|&s| u64::from(s)).sum())
    }

    /// `(-1)^{count in (a, b)}`.
    pub fn parity(&self, a: f64, b: f64) -> Result<i8> {
        let odd = self.sites[self.site_range(a, b)?].iter().fold(0u8, |acc, &s| acc ^ s);
        Ok(if odd == 0 { 1 } else { -1 })
    }

    fn parity_of(&self, range: &std::ops::Range<usize>) -> i64 {
        let odd = self.sites[range.clone()].iter().fold(0u8, |acc, &s| acc ^ s);
        1 - 2 * i64::from(odd)
    }

    fn step<R: Rng>(&mut self, rng: &mut R, r: f64, counts: &mut EventCounts) {
        let n = self.sites.len();
        let k = rng.gen_range(0..=n);
        let u = rng.gen::<f64>() * (2.0 + r);
        counts.events += 1;
        let absorbing = self.boundary == Boundary::Absorbing;
        if k == 0 {
            return;
        }
        if k == self.n_out || k == n {
            if !absorbing {
                return;
            }
            if u < 1.0 {
                if self.sites[k - 1] == 1 {
                    self.sites[k - 1] = 0;
                    if k == n {
                        counts.absorbed_inside_right += 1;
                    } else {
                        counts.absorbed_outside += 1;
                    }
                }
            } else if u < 2.0 && k < n && self.sites[k] == 1 {
                self.sites[k] = 0;
                counts.absorbed_inside_left += 1;
            }
            return;
        }
        if u < 2.0 {
            let (from, to) = if u < 1.0 { (k - 1, k) } else { (k, k - 1) };
            if self.sites[from] == 1 {
                self.sites[from] = 0;
                if self.sites[to] == 1 {
                    self.sites[to] = 0;
                    counts.annihilated += 2;
                } else {
                    self.sites[to] = 1;
                }
            }
        } else {
            counts.immigrations += 1;
            counts.created += 2;
            for s in [k - 1, k] {
                if self.sites[s] == 1 {
                    counts.annihilated += 2;
                }
                self.sites[s] ^= 1;
            }
        }
    }
}

/// Event bookkeeping of one replica.
///
/// Every immigration creates two particles and every collision removes two,
/// so `created - annihilated - absorbed` equals the current particle count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub events: u64,
    pub immigrations: u64,
    pub created: u64,
    pub annihilated: u64,
    /// Absorptions on the outside face of the wall at `0`.
    pub absorbed_outside: u64,
    /// Absorptions on the inside face of the wall at `0`.
    pub absorbed_inside_left: u64,
    /// Absorptions on the inside face of the wall at `L`.
    pub absorbed_inside_right: u64,
    pub final_particles: u64,
}

impl EventCounts {
    pub fn absorbed(&self) -> u64 {
        self.absorbed_outside + self.absorbed_inside_left + self.absorbed_inside_right
    }

    /// Whether `created - annihilated - absorbed` equals `final_particles`.
    pub fn balanced(&self) -> bool {
        self.created.checked_sub(self.annihilated + self.absorbed()) == Some(self.final_particles)
    }
}

fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

fn advance<R: Rng>(
    lattice: &mut OccupancyLattice,
    rng: &mut R,
    params: &SimParams,
    macro_dt: f64,
    counts: &mut EventCounts,
) -> Result<()> {
    let mean = params.total_rate() * macro_dt / (params.eps * params.eps);
    let events = Poisson::new(mean)
        .map_err(|e| Error::InvalidInput(format!("event count distribution: {e}")))?
        .sample(rng) as u64;
    if counts.events.saturating_add(events) > MAX_EVENTS {
        return Err(Error::Overflow(MAX_EVENTS));
    }
    let r = params.immigration_rate();
    for _ in 0..events {
        lattice.step(rng, r, counts);
    }
    lattice.clock += macro_dt / (params.eps * params.eps);
    Ok(())
}

/// Runs replica `replica` from the empty configuration and calls `observe`
/// at every sampling time after burn-in.
pub fn sample_replica<F>(params: &SimParams, replica: usize, observe: F) -> Result<EventCounts>
where
    F: FnMut(&OccupancyLattice, &EventCounts),
{
    run_stream(params, replica, |_| {}, observe)
}

fn run_stream<S, F>(params: &SimParams, replica: usize, mut burned_in: S, mut observe: F) -> Result<EventCounts>
where
    S: FnMut(&EventCounts),
    F: FnMut(&OccupancyLattice, &EventCounts),
{
    if params.expected_events() > MAX_EVENTS as f64 {
        return Err(Error::Overflow(MAX_EVENTS));
    }
    let mut rng = replica_rng(params.seed, replica);
    let mut lattice = OccupancyLattice::empty(params);
    let mut counts = EventCounts::default();
    advance(&mut lattice, &mut rng, params, params.t_burn, &mut counts)?;
    burned_in(&counts);
    let dt = params.effective_sample_interval();
    for _ in 0..params.batches * params.samples_per_batch() {
        advance(&mut lattice, &mut rng, params, dt, &mut counts)?;
        observe(&lattice, &counts);
    }
    counts.final_particles = lattice.particles();
    Ok(counts)
}

/// Per-batch averages of one replica.
#[derive(Debug, Clone)]
struct Batch {
    occupancy: Vec<f64>,
    /// `eta_i xor eta_{i+1}` for `i = 0..sites-1`.
    exclusive: Vec<f64>,
    parity: Vec<f64>,
    /// Absorption rates per macroscopic time: outside, inside at `0`, inside at `L`.
    absorption: [f64; 3],
    particles: f64,
}

struct Accumulator {
    occupancy: Vec<u64>,
    exclusive: Vec<u64>,
    parity: Vec<i64>,
    particles: u64,
    samples: usize,
    absorbed_at_start: [u64; 3],
}

impl Accumulator {
    fn new(sites: usize, intervals: usize) -> Self {
        Accumulator {
            occupancy: vec![0; sites],
            exclusive: vec![0; sites - 1],
            parity: vec![0; intervals],
            particles: 0,
            samples: 0,
            absorbed_at_start: [0; 3],
        }
    }

    fn reset(&mut self, counts: &EventCounts) {
        self.occupancy.iter_mut().for_each(|v| *v = 0);
        self.exclusive.iter_mut().for_each(|v| *v = 0);
        self.parity.iter_mut().for_each(|v| *v = 0);
        self.particles = 0;
        self.samples = 0;
        self.absorbed_at_start = absorbed(counts);
    }

    fn record(&mut self, lattice: &OccupancyLattice, ranges: &[std::ops::Range<usize>]) {
        let s = &lattice.sites;
        for (acc, &v) in self.occupancy.iter_mut().zip(s) {
            *acc += u64::from(v);
        }
        for (acc, w) in self.exclusive.iter_mut().zip(s.windows(2)) {
            *acc += u64::from(w[0] ^ w[1]);
        }
        for (acc, range) in self.parity.iter_mut().zip(ranges) {
            *acc += lattice.parity_of(range);
        }
        self.particles += lattice.particles();
        self.samples += 1;
    }

    fn finish(&self, counts: &EventCounts, duration: f64) -> Batch {
        let n = self.samples as f64;
        let now = absorbed(counts);
        Batch {
            occupancy: self.occupancy.iter().map(|&v| v as f64 / n).collect(),
            exclusive: self.exclusive.iter().map(|&v| v as f64 / n).collect(),
            parity: self.parity.iter().map(|&v| v as f64 / n).collect(),
            absorption: [0, 1, 2].map(|i| (now[i] - self.absorbed_at_start[i]) as f64 / duration),
            particles: self.particles as f64 / n,
        }
    }
}

fn absorbed(c: &EventCounts) -> [u64; 3] {
    [c.absorbed_outside, c.absorbed_inside_left, c.absorbed_inside_right]
}

fn run_replica(
    params: &SimParams,
    replica: usize,
    ranges: &[std::ops::Range<usize>],
) -> Result<(Vec<Batch>, EventCounts)> {
    let per_batch = params.samples_per_batch();
    let duration = per_batch as f64 * params.effective_sample_interval();
    let mut batches = Vec::with_capacity(params.batches);
    let acc = std::cell::RefCell::new(Accumulator::new(params.sites(), ranges.len()));
    let counts = run_stream(
        params,
        replica,
        |counts| acc.borrow_mut().reset(counts),
        |lattice, counts| {
            let mut acc = acc.borrow_mut();
            acc.record(lattice, ranges);
            if acc.samples == per_batch {
                batches.push(acc.finish(counts, duration));
                acc.reset(counts);
            }
        },
    )?;
    Ok((batches, counts))
}

/// Mean and batch-mean standard error of a time-and-replica average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub mean: f64,
    pub sigma: f64,
    pub batches: usize,
}

impl Measurement {
    /// Equal-weight batch means.
    pub fn from_batches<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let sigma = if n > 1 {
            let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / ((n - 1) * n) as f64).sqrt()
        } else {
            f64::NAN
        };
        Measurement { mean, sigma, batches: n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityMeasurement {
    pub a: f64,
    pub b: f64,
    pub mean: f64,
    pub sigma: f64,
}

/// Time-and-replica average of `(-1)^{count in (a, b)}` over a stream of
/// states, with standard error from [`MIN_BATCHES`] contiguous batches.
pub fn measure_parity<'a, I>(states: I, a: f64, b: f64) -> Result<ParityMeasurement>
where
    I: IntoIterator<Item = &'a OccupancyLattice>,
{
    let mut values = Vec::new();
    for state in states {
        values.push(f64::from(state.parity(a, b)?));
    }
    if values.len() < MIN_BATCHES {
        return Err(Error::InsufficientStatistics(format!(
            "{} samples, need at least {MIN_BATCHES}",
            values.len()
        )));
    }
    let per = values.len() / MIN_BATCHES;
    let m = Measurement::from_batches(
        values[..per * MIN_BATCHES].chunks(per).map(|c| c.iter().sum::<f64>() / per as f64),
    );
    Ok(ParityMeasurement {
        a,
        b,
        mean: m.mean,
        sigma: m.sigma,
    })
}

/// One-sided wall statistics behind [`force_estimator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallStatistics {
    /// Density at `0-`, and at `0+` averaged with its mirror image `L-`.
    pub rho_outside: Measurement,
    pub rho_inside: Measurement,
    /// Absorption rates per macroscopic time at the outside face of `0` and
    /// averaged over the two inside faces.
    pub absorption_outside: Measurement,
    pub absorption_inside: Measurement,
    /// `rho(0-) - rho(0+)` and outside minus inside absorption rate.
    pub density_difference: Measurement,
    pub absorption_difference: Measurement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub seed: u64,
    pub replicas: usize,
    pub eps: f64,
    pub requested_eps: f64,
    pub w_out: f64,
    pub n_out: usize,
    pub n_in: usize,
    pub sample_interval: f64,
    pub samples_per_replica: usize,
    pub batches: usize,
    /// First-half minus second-half mean particle number in standard errors.
    pub drift_z: f64,
    pub events: Vec<EventCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mode: Boundary,
    pub beta: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub density_outside: DensityProfile,
    pub density_inside: DensityProfile,
    /// Mean density over the middle half of the outside segment.
    pub bulk: Measurement,
    /// `(0, L)` first, then the requested intervals.
    pub parity: Vec<ParityMeasurement>,
    pub wall: WallStatistics,
    /// Raw force value; [`force_estimator`] adds the statistics check.
    pub force_estimate: ForceResult,
    pub metadata: SimMetadata,
}

/// Density at face `k` (between sites `k-1` and `k`) from the parity of the
/// first one and two sites to the right: `(4 E[eta_k] - E[eta_k xor eta_{k+1}]) / (2 eps)`.
fn right_looking(b: &Batch, k: usize, eps: f64) -> f64 {
    (4.0 * b.occupancy[k] - b.exclusive[k]) / (2.0 * eps)
}

fn left_looking(b: &Batch, k: usize, eps: f64) -> f64 {
    (4.0 * b.occupancy[k - 1] - b.exclusive[k - 2]) / (2.0 * eps)
}

fn segment_profile(
    batches: &[Batch],
    params: &SimParams,
    region: Region,
    faces: std::ops::RangeInclusive<usize>,
    segment: std::ops::Range<usize>,
) -> DensityProfile {
    let eps = params.eps;
    let points = faces
        .map(|k| {
            let right = k + 1 < segment.end;
            let left = k >= segment.start + 2;
            let m = Measurement::from_batches(batches.iter().map(|b| match (left, right) {
                (true, true) => 0.5 * (left_looking(b, k, eps) + right_looking(b, k, eps)),
                (true, false) => left_looking(b, k, eps),
                _ => right_looking(b, k, eps),
            }));
            DensityPoint {
                x: k as f64 * eps - params.w_out,
                rho: m.mean,
                sigma: m.sigma,
            }
        })
        .collect();
    DensityProfile {
        mode: params.model.boundary,
        region,
        points,
    }
}

/// Runs all replicas in parallel and pools their batches in replica order.
pub fn simulate(params: &SimParams) -> Result<SimEstimate> {
    let l = params.model.length;
    let mut intervals = vec![(0.0, l)];
    intervals.extend(params.parity_intervals.iter().copied());
    let probe = OccupancyLattice::empty(params);
    let ranges = intervals
        .iter()
        .map(|&(a, b)| probe.site_range(a, b))
        .collect::<Result<Vec<_>>>()?;

    let runs = (0..params.replicas)
        .into_par_iter()
        .map(|r| run_replica(params, r, &ranges))
        .collect::<Result<Vec<_>>>()?;
    let mut batches = Vec::with_capacity(params.replicas * params.batches);
    let mut events = Vec::with_capacity(params.replicas);
    for (b, c) in runs {
        debug_assert!(c.balanced());
        batches.extend(b);
        events.push(c);
    }

    let (n_out, sites, eps) = (params.n_out, params.sites(), params.eps);
    let density_outside = segment_profile(&batches, params, Region::Outside, 0..=n_out, 0..n_out);
    let density_inside = segment_profile(&batches, params, Region::Inside, n_out..=sites, n_out..sites);

    let parity = intervals
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let m = Measurement::from_batches(batches.iter().map(|bt| bt.parity[i]));
            ParityMeasurement {
                a,
                b,
                mean: m.mean,
                sigma: m.sigma,
            }
        })
        .collect();

    let rho_out = |b: &Batch| left_looking(b, n_out, eps);
    let rho_in = |b: &Batch| 0.5 * (right_looking(b, n_out, eps) + left_looking(b, sites, eps));
    let abs_in = |b: &Batch| 0.5 * (b.absorption[1] + b.absorption[2]);
    let wall = WallStatistics {
        rho_outside: Measurement::from_batches(batches.iter().map(rho_out)),
        rho_inside: Measurement::from_batches(batches.iter().map(rho_in)),
        absorption_outside: Measurement::from_batches(batches.iter().map(|b| b.absorption[0])),
        absorption_inside: Measurement::from_batches(batches.iter().map(abs_in)),
        density_difference: Measurement::from_batches(batches.iter().map(|b| rho_out(b) - rho_in(b))),
        absorption_difference: Measurement::from_batches(batches.iter().map(|b| b.absorption[0] - abs_in(b))),
    };
    let (lo, hi) = ((n_out / 4).max(2), (n_out - n_out / 4).min(n_out - 2));
    let bulk = Measurement::from_batches(batches.iter().map(|b| {
        (lo..=hi).map(|k| 0.5 * (left_looking(b, k, eps) + right_looking(b, k, eps))).sum::<f64>()
            / (hi - lo + 1) as f64
    }));
    let difference = match params.model.boundary {
        Boundary::Reflecting => wall.density_difference,
        Boundary::Absorbing => wall.absorption_difference,
    };

    let half = params.batches / 2;
    let first = Measurement::from_batches(
        batches.chunks(params.batches).flat_map(|c| c[..half].iter().map(|b| b.particles)),
    );
    let second = Measurement::from_batches(
        batches.chunks(params.batches).flat_map(|c| c[half..].iter().map(|b| b.particles)),
    );
    let drift_z = (first.mean - second.mean) / first.sigma.hypot(second.sigma);

    Ok(SimEstimate {
        mode: params.model.boundary,
        beta: params.model.beta,
        length: l,
        density_outside,
        density_inside,
        bulk,
        parity,
        wall,
        force_estimate: ForceResult {
            value: difference.mean,
            mode: params.model.boundary,
            method: Method::Simulation,
            uncertainty: Some(difference.sigma),
        },
        metadata: SimMetadata {
            seed: params.seed,
            replicas: params.replicas,
            eps,
            requested_eps: params.requested_eps,
            w_out: params.w_out,
            n_out,
            n_in: params.n_in,
            sample_interval: params.effective_sample_interval(),
            samples_per_replica: params.batches * params.samples_per_batch(),
            batches: batches.len(),
            drift_z,
            events,
        },
    })
}

/// Force on the wall at `0`: `rho(0-) - rho(0+)` for reflecting walls, the
/// outside minus inside absorption rate for absorbing walls.
///
/// Fails when the standard error exceeds half of the estimate.
pub fn force_estimator(estimate: &SimEstimate, mode: Boundary) -> Result<ForceResult> {
    if estimate.mode != mode {
        return Err(Error::WrongMode {
            expected: mode,
            got: estimate.mode,
        });
    }
    let m = match mode {
        Boundary::Reflecting => estimate.wall.density_difference,
        Boundary::Absorbing => estimate.wall.absorption_difference,
    };
    if !(m.sigma.is_finite() && m.sigma <= MAX_FORCE_REL_ERROR * m.mean.abs()) {
        return Err(Error::InsufficientStatistics(format!(
            "force {} with standard error {}",
            m.mean, m.sigma
        )));
    }
    Ok(ForceResult {
        value: m.mean,
        mode,
        method: Method::Simulation,
        uncertainty: Some(m.sigma),
    })
}
