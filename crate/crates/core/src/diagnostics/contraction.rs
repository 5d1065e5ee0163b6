//! Empirical probe of the posterior contraction rate.
//!
//! For each `(n, Δ)` cell and replication the harness simulates data from a
//! known truth, runs the sampler, and measures the distance between the
//! posterior-mean parameters and the truth by `√h²(λ̂f̂, λ₀f₀)`, the small-`Δ`
//! limit of the scaled Hellinger distance. The slope of `log distance` against
//! `log nΔ` is then fitted by least squares.

use rand::Rng;
use rayon::prelude::*;

use super::{posterior_mean_params, relabel_by_location, retained_rows};
use crate::distances::{limit_divergence, DivergenceKind};
use crate::model::ModelParams;
use crate::rng::Streams;
use crate::sampler::{initial_params, run_chain, ChainConfig, Hyperparameters, InitPolicy};
use crate::simulate::simulate_increments;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ContractionConfig {
    /// `(n, Δ)` cells; `nΔ` must be strictly increasing.
    pub cells: Vec<(usize, f64)>,
    pub replications: usize,
    pub truth: ModelParams,
    pub hyper: Hyperparameters,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Radius multiplier `M` of the ball `M ε_n`.
    pub radius: f64,
    /// Exponent `κ` of the log factor in `ε_n = log^κ(nΔ) / √(nΔ)`.
    pub log_exponent: f64,
}

impl ContractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() || self.replications == 0 {
            return Err(Error::InvalidParameter("need at least one cell and one replication".into()));
        }
        let products: Vec<f64> = self.cells.iter().map(|(n, d)| *n as f64 * d).collect();
        if let Some(k) = products.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotone(k + 1));
        }
        if self.cells.iter().any(|(n, d)| *n == 0 || !(*d > 0.0)) {
            return Err(Error::InvalidParameter("cells need n ≥ 1 and Δ > 0".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        self.hyper.validate()
    }

    /// `ε_n = log^κ(nΔ) / √(nΔ)`.
    pub fn rate(&self, n_delta: f64) -> f64 {
        n_delta.ln().powf(self.log_exponent) / n_delta.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub n: usize,
    pub delta: f64,
    pub n_delta: f64,
    /// Distances of the successful replications, in replication order.
    pub distances: Vec<f64>,
    pub mean_distance: f64,
    /// Mean over replications of the posterior mass outside `M ε_n`.
    pub mass_outside: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionFailure {
    pub n: usize,
    pub delta: f64,
    pub replication: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// Sorted by `nΔ`; cells where every replication failed are omitted.
    pub rows: Vec<ContractionRow>,
    pub failures: Vec<ContractionFailure>,
    /// `None` when fewer than two distinct `nΔ` values have results.
    pub slope: Option<SlopeFit>,
}

/// `√h²` between the intensity measures of two parameter values.
fn scaled_hellinger(a: &ModelParams, b: &ModelParams) -> Result<f64> {
    let d = limit_divergence(
        DivergenceKind::HellingerSq,
        a.lambda(),
        &a.jump_density(),
        b.lambda(),
        &b.jump_density(),
    )?;
    Ok(d.value.sqrt())
}

struct Replicate {
    distance: f64,
    mass_outside: f64,
}

fn replicate(config: &ContractionConfig, n: usize, delta: f64, seed: u64) -> Result<Replicate> {
    let mut rng = Streams::new(seed).rng(0);
    let (data_seed, chain_seed): (u64, u64) = (rng.random(), rng.random());
    let (data, _) = simulate_increments(&config.truth, &vec![delta; n], data_seed)?;
    let initial = initial_params(&data, config.truth.components())?;
    let chain = ChainConfig {
        iterations: config.iterations,
        burn_in: config.burn_in,
        thin: config.thin,
        seed: chain_seed,
        init: InitPolicy::PriorConditioned,
    };
    let trace = relabel_by_location(&run_chain(&data, &config.hyper, initial, &chain)?.trace);
    let estimate = posterior_mean_params(&trace, config.burn_in, 1)?;
    let distance = scaled_hellinger(&estimate, &config.truth)?;
    let radius = config.radius * config.rate(n as f64 * delta);
    let rows = retained_rows(&trace, config.burn_in, 1)?;
    let mut outside = 0usize;
    for row in &rows {
        if scaled_hellinger(&row.params()?, &config.truth)? > radius {
            outside += 1;
        }
    }
    Ok(Replicate {
        distance,
        mass_outside: outside as f64 / rows.len() as f64,
    })
}

/// Ordinary least squares of `y` on `x` with the usual slope standard error.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx <= 1e-12 * (1.0 + mx * mx) {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let std_error = if points.len() > 2 {
        let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(SlopeFit {
        slope,
        intercept,
        std_error,
    })
}

/// Runs every cell and replication (replications in parallel) and fits the
/// log-log slope over all successful replications.
pub fn contraction_experiment(config: &ContractionConfig) -> Result<ContractionReport> {
    config.validate()?;
    let root = Streams::new(config.seed).domain("contract");
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut points = Vec::new();
    for (c, &(n, delta)) in config.cells.iter().enumerate() {
        let mut seeds = root.rng(c as u64);
        let seeds: Vec<u64> = (0..config.replications).map(|_| seeds.random()).collect();
        let results: Vec<Result<Replicate>> = seeds
            .par_iter()
            .map(|&seed| replicate(config, n, delta, seed))
            .collect();
        let mut distances = Vec::new();
        let mut mass = Vec::new();
        for (replication, result) in results.into_iter().enumerate() {
            match result {
                Ok(r) => {
                    distances.push(r.distance);
                    mass.push(r.mass_outside);
                }
                Err(e) => failures.push(ContractionFailure {
                    n,
                    delta,
                    replication,
                    message: e.to_string(),
                }),
            }
        }
        if distances.is_empty() {
            continue;
        }
        let n_delta = n as f64 * delta;
        points.extend(distances.iter().map(|d| (n_delta.ln(), d.ln())));
        rows.push(ContractionRow {
            n,
            delta,
            n_delta,
            mean_distance: distances.iter().sum::<f64>() / distances.len() as f64,
            mass_outside: mass.iter().sum::<f64>() / mass.len() as f64,
            distances,
        });
    }
    rows.sort_by(|a, b| a.n_delta.total_cmp(&b.n_delta));
    Ok(ContractionReport {
        rows,
        failures,
        slope: fit_slope(&points),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(cells: Vec<(usize, f64)>) -> ContractionConfig {
        ContractionConfig {
            cells,
            replications: 2,
            truth: ModelParams::new(vec![0.8, 0.2], vec![2.0, -1.0], 1.0).unwrap(),
            hyper: Hyperparameters::unit(2),
            iterations: 60,
            burn_in: 20,
            thin: 1,
            seed: 4,
            radius: 1.0,
            log_exponent: 1.0,
        }
    }

    #[test]
    fn exact_line_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 3.0 - 0.5 * k as f64)).collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.std_error < 1e-12);
        assert!(fit_slope(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
    }

    #[test]
    fn single_row_has_no_slope() {
        let report = contraction_experiment(&config(vec![(100, 1.0)])).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].distances.len(), 2);
        assert!(report.slope.is_none());
        let m = report.rows[0].mass_outside;
        assert!((0.0..=1.0).contains(&m));
    }

    #[test]
    fn cells_must_increase() {
        assert!(matches!(
            contraction_experiment(&config(vec![(200, 1.0), (100, 1.0)])),
            Err(Error::NonMonotone(1))
        ));
    }
}
