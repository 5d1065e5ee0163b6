//! Metropolis–Hastings update of the per-segment jump-type counts.
//!
//! The proposal draws `n° ~ Poisson(λΔ_i)` conditioned on `n° ≥ 1` and splits
//! it as `a° ~ Multinomial(n°; ψ/λ)`. Its mass is
//!
//! ```text
//! q(a° | θ) = e^{-λΔ} / (1 - e^{-λΔ}) · Π_j (ψ_j Δ)^{n°_j} / n°_j!
//! ```
//!
//! which is the Poisson prior on the counts up to a constant, so the
//! Metropolis–Hastings ratio reduces to the ratio of Gaussian likelihoods
//! `φ(z; a°'μ, n°/τ) / φ(z; a'μ, n/τ)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use statrs::function::factorial::ln_factorial;

use super::state::{AuxiliaryState, ChainState};
use crate::model::{ln_normal_pdf, ModelParams};
use crate::rng::Streams;
use crate::simulate::ObservationSet;
use crate::{Error, Result};

/// Above this mean the truncated Poisson is drawn by rejection instead of
/// inversion.
const INVERSION_MAX_MEAN: f64 = 10.0;

/// Poisson distribution conditioned on a nonzero outcome.
#[derive(Debug, Clone, Copy)]
pub struct ZeroTruncatedPoisson {
    mean: f64,
}

impl ZeroTruncatedPoisson {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "zero-truncated Poisson needs a positive mean, got {mean}"
            )));
        }
        Ok(Self { mean })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn ln_pmf(&self, k: u32) -> f64 {
        if k == 0 {
            return f64::NEG_INFINITY;
        }
        k as f64 * self.mean.ln() - ln_factorial(k as u64) - self.mean.exp_m1().ln()
    }

    pub fn pmf(&self, k: u32) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// Inversion of the truncated cdf for small means; for large means a
    /// plain Poisson draw is rejected until nonzero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.mean > INVERSION_MAX_MEAN {
            let poisson = Poisson::new(self.mean).expect("mean validated");
            loop {
                let k = poisson.sample(rng);
                if k >= 1.0 {
                    return k as u32;
                }
            }
        }
        let u: f64 = rng.random();
        let mut k = 1u32;
        let mut p = self.mean / self.mean.exp_m1();
        let mut cdf = p;
        while u >= cdf && p > 0.0 {
            k += 1;
            p *= self.mean / k as f64;
            cdf += p;
        }
        k
    }
}

/// Splits `total` jumps over types with probabilities proportional to
/// `weights`, by sequential binomial draws.
pub(crate) fn split_multinomial<R: Rng + ?Sized>(
    total: u32,
    weights: &[f64],
    rng: &mut R,
    out: &mut [u32],
) {
    let last = weights.len() - 1;
    let mut remaining = total;
    let mut mass: f64 = weights.iter().sum();
    for j in 0..last {
        if remaining == 0 {
            out[j] = 0;
            continue;
        }
        let p = (weights[j] / mass).clamp(0.0, 1.0);
        let x = Binomial::new(remaining as u64, p)
            .expect("probability clamped to [0, 1]")
            .sample(rng) as u32;
        out[j] = x;
        remaining -= x;
        mass -= weights[j];
    }
    out[last] = remaining;
}

/// Draws a proposal `a°` for a segment of length `delta` into `out`.
pub fn propose_segment_into<R: Rng + ?Sized>(
    params: &ModelParams,
    delta: f64,
    rng: &mut R,
    out: &mut [u32],
) -> Result<()> {
    let total = ZeroTruncatedPoisson::new(params.lambda() * delta)?.sample(rng);
    split_multinomial(total, params.psi(), rng, out);
    Ok(())
}

pub fn propose_segment<R: Rng + ?Sized>(
    params: &ModelParams,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let mut out = vec![0; params.components()];
    propose_segment_into(params, delta, rng, &mut out)?;
    Ok(out)
}

/// `ln q(a | θ)` for a segment of length `delta`.
pub fn ln_proposal_mass(params: &ModelParams, delta: f64, counts: &[u32]) -> f64 {
    if counts.iter().all(|c| *c == 0) {
        return f64::NEG_INFINITY;
    }
    let x = params.lambda() * delta;
    let body: f64 = counts
        .iter()
        .zip(params.psi())
        .map(|(&n, psi)| n as f64 * (psi * delta).ln() - ln_factorial(n as u64))
        .sum();
    body - x.exp_m1().ln()
}

/// `ln φ(z; a'μ, n/τ)`.
pub(crate) fn ln_segment_likelihood(params: &ModelParams, z: f64, counts: &[u32]) -> f64 {
    let jumps: u32 = counts.iter().sum();
    let mean: f64 = counts.iter().zip(params.mu()).map(|(n, m)| *n as f64 * m).sum();
    ln_normal_pdf(z, mean, jumps as f64 / params.tau())
}

/// `ln A` for moving a segment from `current` to `proposed`.
pub fn ln_accept_ratio(params: &ModelParams, z: f64, current: &[u32], proposed: &[u32]) -> f64 {
    ln_segment_likelihood(params, z, proposed) - ln_segment_likelihood(params, z, current)
}

/// `A = φ(z; a°'μ, n°/τ) / φ(z; a'μ, n/τ)`; a move is accepted with
/// probability `min(1, A)`.
pub fn accept_ratio(params: &ModelParams, z: f64, current: &[u32], proposed: &[u32]) -> f64 {
    ln_accept_ratio(params, z, current, proposed).exp()
}

/// One Metropolis–Hastings step for row `k` using its own stream.
pub(crate) fn update_segment(
    state: &mut ChainState,
    data: &ObservationSet,
    streams: &Streams,
    k: usize,
    proposal: &mut [u32],
) -> Result<()> {
    let i = state.aux.segments()[k];
    let mut rng = streams.rng2(state.iteration as u64, i as u64);
    propose_segment_into(&state.params, data.durations()[i], &mut rng, proposal)?;
    let ln_a = ln_accept_ratio(&state.params, data.increments()[i], state.aux.counts(k), proposal);
    let u: f64 = rng.random();
    state.proposed[k] += 1;
    if u.ln() < ln_a {
        state.aux.counts_mut(k).copy_from_slice(proposal);
        state.accepted[k] += 1;
    }
    Ok(())
}

/// Updates every segment with a nonzero increment; segment `i` in sweep `t`
/// draws from stream `(t, i)` of `streams`, so the result does not depend on
/// the visiting order.
pub fn update_segments(state: &mut ChainState, data: &ObservationSet, streams: &Streams) -> Result<()> {
    let mut proposal = vec![0u32; state.aux.components()];
    for k in 0..state.aux.len() {
        update_segment(state, data, streams, k, &mut proposal)?;
    }
    Ok(())
}

/// How the latent counts are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPolicy {
    /// Draw from the segment proposal under the initial parameters.
    #[default]
    PriorConditioned,
    /// One jump per segment, of the type whose mean is nearest to `z_i`.
    SingleNearestMean,
}

pub fn init_aux(
    data: &ObservationSet,
    params: &ModelParams,
    policy: InitPolicy,
    seed: u64,
) -> Result<AuxiliaryState> {
    let components = params.components();
    let segments = data.nonzero().to_vec();
    let mut counts = vec![0u32; segments.len() * components];
    let streams = Streams::new(seed).domain("init");
    for (row, &i) in counts.chunks_exact_mut(components).zip(&segments) {
        match policy {
            InitPolicy::PriorConditioned => {
                let mut rng = streams.rng(i as u64);
                propose_segment_into(params, data.durations()[i], &mut rng, row)?;
            }
            InitPolicy::SingleNearestMean => {
                let z = data.increments()[i];
                let nearest = params
                    .mu()
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (z - a.1).abs().total_cmp(&(z - b.1).abs()))
                    .map(|(j, _)| j)
                    .expect("at least one component");
                row[nearest] = 1;
            }
        }
    }
    AuxiliaryState::from_flat(components, segments, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    fn params() -> ModelParams {
        ModelParams::new(vec![0.8, 0.2], vec![2.0, -1.0], 1.0).unwrap()
    }

    #[test]
    fn truncated_poisson_pmf_sums_to_one() {
        for mean in [1e-6, 0.3, 1.0, 3.0, 9.0] {
            let d = ZeroTruncatedPoisson::new(mean).unwrap();
            let total: f64 = (1..200).map(|k| d.pmf(k)).sum();
            assert!((total - 1.0).abs() < 1e-12, "{mean}: {total}");
            assert_eq!(d.pmf(0), 0.0);
        }
        assert!(ZeroTruncatedPoisson::new(0.0).is_err());
    }

    #[test]
    fn truncated_poisson_samples_are_positive() {
        let mut rng = Streams::new(1).rng(0);
        for mean in [1e-9, 0.5, 4.0, 25.0] {
            let d = ZeroTruncatedPoisson::new(mean).unwrap();
            for _ in 0..2000 {
                assert!(d.sample(&mut rng) >= 1);
            }
        }
        let tiny = ZeroTruncatedPoisson::new(1e-9).unwrap();
        assert!((0..1000).all(|_| tiny.sample(&mut rng) == 1));
    }

    #[test]
    fn single_type_proposal_keeps_everything() {
        let p = ModelParams::new(vec![1.3], vec![0.5], 2.0).unwrap();
        let mut rng = Streams::new(2).rng(0);
        for _ in 0..500 {
            let a = propose_segment(&p, 1.0, &mut rng).unwrap();
            assert_eq!(a.len(), 1);
            assert!(a[0] >= 1);
        }
    }

    #[test]
    fn identity_and_equal_height_ratios() {
        let p = params();
        assert_eq!(accept_ratio(&p, 0.7, &[1, 2], &[1, 2]), 1.0);
        // z equals both means and both have n = 2.
        let r = accept_ratio(&p, 1.0, &[1, 1], &[1, 1]);
        assert_eq!(r, 1.0);
        let p = ModelParams::new(vec![0.8, 0.2], vec![1.0, 1.0], 1.0).unwrap();
        assert!((accept_ratio(&p, 2.0, &[2, 0], &[0, 2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn proposal_mass_normalises() {
        // Σ over all count vectors with n ≤ 40 of q(a | θ) is 1.
        let p = params();
        let mut total = 0.0;
        for n in 1..=40u32 {
            for n1 in 0..=n {
                total += ln_proposal_mass(&p, 1.0, &[n1, n - n1]).exp();
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(ln_proposal_mass(&p, 1.0, &[0, 0]), f64::NEG_INFINITY);
    }

    #[test]
    fn init_policies() {
        let p = params();
        let data = ObservationSet::equidistant(1.0, vec![1.9, 0.0, -0.8, 0.4]).unwrap();
        let aux = init_aux(&data, &p, InitPolicy::SingleNearestMean, 0).unwrap();
        assert_eq!(aux.segments(), &[0, 2, 3]);
        assert_eq!(aux.counts(0), &[1, 0]);
        assert_eq!(aux.counts(1), &[0, 1]);
        assert_eq!(aux.counts(2), &[0, 1]);
        let a = init_aux(&data, &p, InitPolicy::PriorConditioned, 5).unwrap();
        let b = init_aux(&data, &p, InitPolicy::PriorConditioned, 5).unwrap();
        assert_eq!(a, b);
        assert!((0..a.len()).all(|k| a.jumps(k) >= 1));
        let empty = ObservationSet::equidistant(1.0, vec![0.0, 0.0]).unwrap();
        assert!(init_aux(&empty, &p, InitPolicy::PriorConditioned, 1).unwrap().is_empty());
    }

    #[test]
    fn flat_likelihood_limit() {
        // As τ → 0 the exponents vanish and only the normalising constants
        // remain: A → √(n / n°), so moves to fewer jumps are always accepted.
        let p = ModelParams::new(vec![0.8, 0.2], vec![2.0, -1.0], 1e-12).unwrap();
        for (a, b) in [([1, 0], [0, 1]), ([2, 1], [1, 0]), ([1, 0], [3, 1])] {
            let n: u32 = a.iter().sum();
            let m: u32 = b.iter().sum();
            let expected = (n as f64 / m as f64).sqrt();
            assert!((accept_ratio(&p, 1.7, &a, &b) - expected).abs() < 1e-9);
        }
        let data = ObservationSet::equidistant(1.0, vec![1.9, -0.8, 3.1, 0.2]).unwrap();
        let aux = init_aux(&data, &p, InitPolicy::PriorConditioned, 3).unwrap();
        let mut state = ChainState::new(p, aux);
        let streams = Streams::new(4).domain("segments");
        for t in 0..500 {
            state.iteration = t;
            update_segments(&mut state, &data, &streams).unwrap();
        }
        let rate = state.acceptance_rate().unwrap();
        assert!(rate > 0.85, "{rate}");
    }

    #[test]
    fn sweep_is_independent_of_visiting_order() {
        let p = params();
        let data = ObservationSet::equidistant(1.0, vec![1.9, -0.8, 3.1, 0.2, 0.0, 5.5]).unwrap();
        let aux = init_aux(&data, &p, InitPolicy::PriorConditioned, 3).unwrap();
        let streams = Streams::new(9).domain("segments");
        let mut forward = ChainState::new(p.clone(), aux.clone());
        let mut backward = ChainState::new(p, aux);
        forward.iteration = 17;
        backward.iteration = 17;
        update_segments(&mut forward, &data, &streams).unwrap();
        let mut buf = vec![0; 2];
        for k in (0..backward.aux.len()).rev() {
            update_segment(&mut backward, &data, &streams, k, &mut buf).unwrap();
        }
        assert_eq!(forward.aux, backward.aux);
        assert_eq!(forward.accepted, backward.accepted);
    }
}
