#![allow(dead_code)]

use std::collections::HashMap;

use decompound::model::ModelParams;

pub fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((x - mean).powi(2) / var + (2.0 * std::f64::consts::PI * var).ln())
}

pub fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// All count vectors with `J` entries and total in `1..=max_total`.
pub fn count_vectors(components: usize, max_total: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if prefix.iter().sum::<u32>() > 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for n in 0..=budget {
            prefix.push(n);
            rec(prefix, left - 1, budget - n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), components, max_total, &mut out);
    out
}

/// Exact conditional of one segment's counts given `θ`, `z` and `Δ`:
/// `∝ Π_j (ψ_j Δ)^{n_j} / n_j! · φ(z; a'μ, n/τ)` over `n ≥ 1`, enumerated up
/// to `max_total` jumps.
pub fn segment_conditional(params: &ModelParams, z: f64, delta: f64, max_total: u32) -> Vec<(Vec<u32>, f64)> {
    let mut states: Vec<(Vec<u32>, f64)> = count_vectors(params.components(), max_total)
        .into_iter()
        .map(|a| {
            let n: u32 = a.iter().sum();
            let mean: f64 = a.iter().zip(params.mu()).map(|(k, m)| *k as f64 * m).sum();
            let prior: f64 = a
                .iter()
                .zip(params.psi())
                .map(|(&k, psi)| k as f64 * (psi * delta).ln() - ln_factorial(k))
                .sum();
            let lp = prior + normal_ln_pdf(z, mean, n as f64 / params.tau());
            (a, lp)
        })
        .collect();
    let top = states.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = states.iter().map(|s| (s.1 - top).exp()).sum();
    for s in &mut states {
        s.1 = (s.1 - top).exp() / total;
    }
    states
}

/// Total-variation distance between an empirical histogram and exact
/// probabilities; keys missing from `exact` count fully.
pub fn total_variation(counts: &HashMap<Vec<u32>, u64>, draws: u64, exact: &HashMap<Vec<u32>, f64>) -> f64 {
    let mut tv = 0.0;
    for (k, p) in exact {
        let q = counts.get(k).copied().unwrap_or(0) as f64 / draws as f64;
        tv += (p - q).abs();
    }
    for (k, c) in counts {
        if !exact.contains_key(k) {
            tv += *c as f64 / draws as f64;
        }
    }
    0.5 * tv
}

/// One-sample Kolmogorov-Smirnov distance against `cdf`.
pub fn ks_against(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Normal-Gamma posterior for one component with every segment holding one
/// jump: `(posterior mean of μ, κ_n, shape, rate)`.
pub fn normal_gamma_single(z: &[f64], xi: f64, kappa: f64, alpha: f64, beta: f64) -> (f64, f64, f64, f64) {
    let m = z.len() as f64;
    let zbar = z.iter().sum::<f64>() / m;
    let ss: f64 = z.iter().map(|v| (v - zbar).powi(2)).sum();
    let kappa_n = kappa + m;
    let mean = (kappa * xi + m * zbar) / kappa_n;
    let rate = beta + 0.5 * (ss + kappa * m * (zbar - xi).powi(2) / kappa_n);
    (mean, kappa_n, alpha + m / 2.0, rate)
}
