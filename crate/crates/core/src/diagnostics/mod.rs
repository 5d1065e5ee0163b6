//! Trace post-processing: burn-in and thinning, autocorrelation, effective
//! sample size, posterior summaries and posterior-mean densities.

mod contraction;

pub use contraction::{contraction_experiment, ContractionConfig, ContractionFailure, ContractionReport, ContractionRow, SlopeFit};

use crate::model::{MixtureDensity, ModelParams};
use crate::sampler::{Trace, TraceParam, TraceRow};
use crate::{Error, Result};

/// Lag-`k` sample autocorrelations for `k = 0..=max_lag`, using the biased
/// (divide by `n`) autocovariance estimator.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::InvalidParameter(format!(
            "series of length {n} is too short for lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centred.iter().map(|x| x * x).sum::<f64>();
    if c0 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                centred[..n - k].iter().zip(&centred[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
            }
        })
        .collect())
}

/// Effective sample size by Geyer's initial monotone sequence estimator:
/// sums of adjacent autocorrelation pairs are accumulated while positive,
/// each capped by its predecessor. The result never exceeds `n`; a constant
/// series reports `n`.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centred.iter().map(|x| x * x).sum::<f64>();
    if c0 <= 0.0 {
        return n as f64;
    }
    let rho = |k: usize| centred[..n - k].iter().zip(&centred[k..]).map(|(a, b)| a * b).sum::<f64>() / c0;
    let mut sum = 0.0;
    let mut previous = f64::INFINITY;
    let mut k = 0;
    while k + 1 < n {
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(previous);
        sum += pair;
        previous = pair;
        k += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0);
    n as f64 / tau
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Rows with `iteration > burn_in`, then every `thin`-th of those.
pub fn retained_rows(trace: &Trace, burn_in: usize, thin: usize) -> Result<Vec<&TraceRow>> {
    if thin == 0 {
        return Err(Error::InvalidParameter("thin must be at least 1".into()));
    }
    let rows: Vec<&TraceRow> = trace
        .rows
        .iter()
        .filter(|r| r.iteration > burn_in)
        .step_by(thin)
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyRetained);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    pub ess: f64,
}

impl ParameterSummary {
    pub fn from_samples(name: String, values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            name,
            mean,
            sd,
            q025: quantile_sorted(&sorted, 0.025),
            q50: quantile_sorted(&sorted, 0.5),
            q975: quantile_sorted(&sorted, 0.975),
            ess: effective_sample_size(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    /// In trace-header order: `psi_j`, `mu_j`, `tau`, `lambda`.
    pub parameters: Vec<ParameterSummary>,
    pub retained: usize,
    pub acceptance_rate: Option<f64>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

pub fn posterior_summary(trace: &Trace, burn_in: usize, thin: usize) -> Result<PosteriorSummary> {
    let rows = retained_rows(trace, burn_in, thin)?;
    let parameters = trace
        .params()
        .into_iter()
        .map(|p| {
            let values: Vec<f64> = rows.iter().map(|r| p.get(r)).collect();
            ParameterSummary::from_samples(p.name(), &values)
        })
        .collect();
    Ok(PosteriorSummary {
        parameters,
        retained: rows.len(),
        acceptance_rate: trace.acceptance_rate,
    })
}

/// Componentwise posterior means of `(ψ, μ, τ)`.
pub fn posterior_mean_params(trace: &Trace, burn_in: usize, thin: usize) -> Result<ModelParams> {
    let rows = retained_rows(trace, burn_in, thin)?;
    let n = rows.len() as f64;
    let mean = |p: TraceParam| rows.iter().map(|r| p.get(r)).sum::<f64>() / n;
    let j = trace.components;
    ModelParams::new(
        (0..j).map(|k| mean(TraceParam::Psi(k))).collect(),
        (0..j).map(|k| mean(TraceParam::Mu(k))).collect(),
        mean(TraceParam::Tau),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityEstimate {
    /// Mixture density at the posterior-mean parameters.
    #[default]
    PlugIn,
    /// Average of the per-iterate mixture densities.
    Predictive,
}

pub fn posterior_mean_density(
    trace: &Trace,
    burn_in: usize,
    thin: usize,
    grid: &[f64],
    estimate: DensityEstimate,
) -> Result<Vec<f64>> {
    match estimate {
        DensityEstimate::PlugIn => {
            let f = posterior_mean_params(trace, burn_in, thin)?.jump_density();
            Ok(grid.iter().map(|&x| f.pdf(x)).collect())
        }
        DensityEstimate::Predictive => {
            let rows = retained_rows(trace, burn_in, thin)?;
            let mut curve = vec![0.0; grid.len()];
            for row in &rows {
                let f: MixtureDensity = row.params()?.jump_density();
                for (c, &x) in curve.iter_mut().zip(grid) {
                    *c += f.pdf(x);
                }
            }
            curve.iter_mut().for_each(|c| *c /= rows.len() as f64);
            Ok(curve)
        }
    }
}

/// Relabels every row so that the means are increasing; `ψ` is permuted
/// alongside. Leaves `λ`, `τ` and every row's density unchanged.
pub fn relabel_by_location(trace: &Trace) -> Trace {
    let mut out = trace.clone();
    for row in &mut out.rows {
        let mut order: Vec<usize> = (0..row.mu.len()).collect();
        order.sort_by(|&a, &b| row.mu[a].total_cmp(&row.mu[b]));
        let mu = order.iter().map(|&k| row.mu[k]).collect();
        let psi = order.iter().map(|&k| row.psi[k]).collect();
        row.mu = mu;
        row.psi = psi;
    }
    out
}
