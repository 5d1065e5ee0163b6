//! Simulation of CPP paths and of discretely observed increments.
//!
//! Two routes produce increments with the same law:
//!
//! - [`simulate_path`] followed by [`discretize`]: a Poisson number of jumps
//!   on `(0, T]`, uniform times, iid mixture sizes, summed per segment;
//! - [`simulate_increments`]: per segment `i` and type `j`, draw
//!   `n_ij ~ Poisson(ψ_j Δ_i)` and then `z_i ~ N(a_i'μ, n_i/τ)`. This route
//!   also returns the latent counts.
//!
//! Streams: the path route uses stream 0 of domain `"path"`; the increment
//! route gives segment `i` its own stream `i` in domain `"increments"`, so any
//! segment can be regenerated on its own.

use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal, Poisson};

use crate::model::{MixtureDensity, ModelParams};
use crate::rng::Streams;
use crate::sampler::AuxiliaryState;
use crate::{Error, Result};

/// A simulated CPP on `(0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CppPath {
    horizon: f64,
    jump_times: Vec<f64>,
    jump_sizes: Vec<f64>,
    seed: u64,
}

impl CppPath {
    pub fn new(horizon: f64, jump_times: Vec<f64>, jump_sizes: Vec<f64>, seed: u64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if jump_times.len() != jump_sizes.len() {
            return Err(Error::InvalidParameter("jump times and sizes differ in length".into()));
        }
        if let Some(k) = jump_times.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotone(k + 1));
        }
        if jump_times.iter().any(|t| !(*t > 0.0 && *t <= horizon)) {
            return Err(Error::InvalidParameter("jump times must lie in (0, T]".into()));
        }
        Ok(Self {
            horizon,
            jump_times,
            jump_sizes,
            seed,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jump_sizes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// `X_t`: sum of the jumps at times `≤ t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        self.jump_sizes[..k].iter().sum()
    }

    /// `(time, size)` pairs.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.jump_times
            .iter()
            .copied()
            .zip(self.jump_sizes.iter().copied())
            .collect()
    }
}

/// Increments `z_i` over segments of length `Δ_i`, with the index set of
/// nonzero increments.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    durations: Vec<f64>,
    increments: Vec<f64>,
    nonzero: Vec<usize>,
}

impl ObservationSet {
    /// An increment counts as zero when it is exactly `0.0` or when
    /// `|z| < zero_threshold`.
    pub fn new(durations: Vec<f64>, increments: Vec<f64>, zero_threshold: f64) -> Result<Self> {
        if durations.len() != increments.len() {
            return Err(Error::Data(format!(
                "{} durations but {} increments",
                durations.len(),
                increments.len()
            )));
        }
        if durations.is_empty() {
            return Err(Error::Data("no observations".into()));
        }
        if let Some(i) = durations.iter().position(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Data(format!("duration {i} is not positive")));
        }
        if let Some(i) = increments.iter().position(|z| !z.is_finite()) {
            return Err(Error::Data(format!("increment {i} is not finite")));
        }
        if !(zero_threshold >= 0.0) {
            return Err(Error::InvalidParameter("zero threshold must be nonnegative".into()));
        }
        let nonzero = increments
            .iter()
            .enumerate()
            .filter(|(_, z)| !(**z == 0.0 || z.abs() < zero_threshold))
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            durations,
            increments,
            nonzero,
        })
    }

    /// Equidistant observations with exact zero detection.
    pub fn equidistant(delta: f64, increments: Vec<f64>) -> Result<Self> {
        Self::new(vec![delta; increments.len()], increments, 0.0)
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Indices `i` with a nonzero increment, ascending.
    pub fn nonzero(&self) -> &[usize] {
        &self.nonzero
    }

    /// `T = Σ Δ_i`.
    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Observation times `t_0 = 0, t_1, …, t_n`.
    pub fn times(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.durations.iter().scan(0.0, |t, d| {
                *t += d;
                Some(*t)
            }))
            .collect()
    }

    /// Path values `X_{t_0} = 0, X_{t_1}, …`.
    pub fn cumulative(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.increments.iter().scan(0.0, |x, z| {
                *x += z;
                Some(*x)
            }))
            .collect()
    }
}

fn draw_jump_size<R: Rng>(
    f: &MixtureDensity,
    labels: &WeightedIndex<f64>,
    rng: &mut R,
) -> f64 {
    let j = labels.sample(rng);
    f.means()[j] + f.variance().sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal)
}

/// Jump count `~ Poisson(λT)`, times uniform on `(0, T]`, sizes iid from `f`.
pub fn simulate_path(lambda: f64, f: &MixtureDensity, horizon: f64, seed: u64) -> Result<CppPath> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = Streams::new(seed).domain("path").rng(0);
    let count = Poisson::new(lambda * horizon)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(&mut rng) as usize;
    let mut times: Vec<f64> = (0..count)
        .map(|_| horizon * (1.0 - rng.random::<f64>()))
        .collect();
    times.sort_by(f64::total_cmp);
    let labels = WeightedIndex::new(f.weights()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let sizes = (0..count).map(|_| draw_jump_size(f, &labels, &mut rng)).collect();
    CppPath::new(horizon, times, sizes, seed)
}

/// Increments of `path` over the grid `0 < t_1 < … < t_n ≤ T`.
pub fn discretize(path: &CppPath, grid: &[f64]) -> Result<ObservationSet> {
    if grid.is_empty() {
        return Err(Error::Data("empty observation grid".into()));
    }
    if !(grid[0] > 0.0) {
        return Err(Error::NonMonotone(0));
    }
    if let Some(k) = grid.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone(k + 1));
    }
    if grid[grid.len() - 1] > path.horizon() {
        return Err(Error::InvalidParameter("grid extends past the path horizon".into()));
    }
    let mut increments = Vec::with_capacity(grid.len());
    let mut durations = Vec::with_capacity(grid.len());
    let mut next_jump = 0;
    let mut previous = 0.0;
    for &t in grid {
        let mut z = 0.0;
        while next_jump < path.jump_count() && path.jump_times()[next_jump] <= t {
            z += path.jump_sizes()[next_jump];
            next_jump += 1;
        }
        increments.push(z);
        durations.push(t - previous);
        previous = t;
    }
    ObservationSet::new(durations, increments, 0.0)
}

/// Equidistant grid `Δ, 2Δ, …, nΔ`.
pub fn equidistant_grid(n: usize, delta: f64) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * delta).collect()
}

/// Simulates increments through the latent per-type counts and returns both.
pub fn simulate_increments(
    params: &ModelParams,
    durations: &[f64],
    seed: u64,
) -> Result<(ObservationSet, AuxiliaryState)> {
    if let Some(i) = durations.iter().position(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidParameter(format!("duration {i} is not positive")));
    }
    let streams = Streams::new(seed).domain("increments");
    let components = params.components();
    let sd = (1.0 / params.tau()).sqrt();
    let mut increments = Vec::with_capacity(durations.len());
    let mut segments = Vec::new();
    let mut counts = Vec::new();
    let mut row = vec![0u32; components];
    for (i, &delta) in durations.iter().enumerate() {
        let mut rng = streams.rng(i as u64);
        for (n, psi) in row.iter_mut().zip(params.psi()) {
            *n = Poisson::new(psi * delta)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(&mut rng) as u32;
        }
        let jumps: u32 = row.iter().sum();
        if jumps == 0 {
            increments.push(0.0);
            continue;
        }
        let mean: f64 = row.iter().zip(params.mu()).map(|(n, m)| *n as f64 * m).sum();
        let z = Normal::new(mean, sd * (jumps as f64).sqrt())
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(&mut rng);
        increments.push(z);
        segments.push(i);
        counts.extend_from_slice(&row);
    }
    let data = ObservationSet::new(durations.to_vec(), increments, 0.0)?;
    // A continuous draw of exactly 0.0 would break the z ≠ 0 ⇔ n ≥ 1
    // correspondence; it has probability zero, so treat it as a bug.
    if data.nonzero() != segments.as_slice() {
        return Err(Error::Invariant("simulated nonzero set disagrees with counts".into()));
    }
    let aux = AuxiliaryState::from_flat(components, segments, counts)?;
    Ok((data, aux))
}
