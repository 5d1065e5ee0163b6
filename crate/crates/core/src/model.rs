//! Jump densities and the law of a CPP increment.
//!
//! The jump density is a location mixture of Gaussians with a shared
//! precision,
//!
//! ```text
//! f(x) = Σ_j ρ_j φ(x; μ_j, 1/τ),
//! ```
//!
//! and the law of an increment over a window of length `Δ` is an atom of
//! weight `exp(-λΔ)` at zero plus the continuous part
//! `(1 - exp(-λΔ)) Σ_{m≥1} a_m(λΔ) f^{*m}`, with
//! `a_m(x) = x^m / (m! (e^x - 1))`.
//!
//! All Gaussian densities are evaluated in log space and combined with
//! log-sum-exp, so far-tail evaluations never underflow to an exact zero
//! before the final exponentiation.

use statrs::function::factorial::ln_factorial;

use crate::{Error, Result};

/// `ln √(2π)`.
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Maximum number of multinomial terms a convolution expansion may use.
pub const DEFAULT_CONVOLUTION_CAP: u64 = 1_000_000;

/// Tolerance on the neglected tail `Σ_{m > M} a_m` used to pick the series
/// truncation automatically.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Tolerance on `|Σ ρ_j - 1|`.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Window half-width in standard deviations used for quadrature.
const WINDOW_SDS: f64 = 10.0;

pub(crate) fn ln_normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / variance - 0.5 * variance.ln() - LN_SQRT_2PI
}

/// Numerically stable `ln Σ exp(v)`; `-∞` for an empty or all `-∞` input.
pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values
        .clone()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.into_iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Calls `visit` with every vector of `parts` nonnegative integers summing
/// to `total`, in lexicographically decreasing order of the first entry.
pub(crate) fn for_each_composition(total: u32, parts: usize, mut visit: impl FnMut(&[u32])) {
    assert!(parts >= 1);
    let mut counts = vec![0u32; parts];
    counts[0] = total;
    loop {
        visit(&counts);
        // Find the rightmost non-last position with a positive count.
        let Some(pos) = (0..parts - 1).rev().find(|&p| counts[p] > 0) else {
            return;
        };
        counts[pos] -= 1;
        let rest = counts[parts - 1];
        counts[parts - 1] = 0;
        counts[pos + 1] = rest + 1;
    }
}

/// Number of count vectors of length `parts` summing to `total`:
/// `C(total + parts - 1, parts - 1)`, saturating.
pub fn composition_count(total: u32, parts: usize) -> u128 {
    let n = total as u128 + parts as u128 - 1;
    let k = (parts as u128 - 1).min(total as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Gaussian location mixture with shared precision: the jump density `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDensity {
    weights: Vec<f64>,
    means: Vec<f64>,
    precision: f64,
}

impl MixtureDensity {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, precision: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        if weights.len() != means.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights but {} means",
                weights.len(),
                means.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("mixture weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("mixture means must be finite".into()));
        }
        if !(precision.is_finite() && precision > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "precision must be positive, got {precision}"
            )));
        }
        Ok(Self {
            weights,
            means,
            precision,
        })
    }

    /// Single Gaussian `N(mean, 1/precision)`.
    pub fn normal(mean: f64, precision: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![mean], precision)
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn variance(&self) -> f64 {
        1.0 / self.precision
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let var = self.variance();
        log_sum_exp(
            self.weights
                .iter()
                .zip(&self.means)
                .map(move |(w, m)| w.ln() + ln_normal_pdf(x, *m, var)),
        )
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `E[Y]` for `Y ~ f`.
    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// `E[Y²]` for `Y ~ f`.
    pub fn second_moment(&self) -> f64 {
        let var = self.variance();
        self.weights
            .iter()
            .zip(&self.means)
            .map(|(w, m)| w * (m * m + var))
            .sum()
    }

    /// Interval covering every component mean ± 10 standard deviations.
    pub fn window(&self) -> (f64, f64) {
        let pad = WINDOW_SDS * self.variance().sqrt();
        let lo = self.means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - pad, hi + pad)
    }

    /// Multinomial expansion of the `folds`-fold convolution `f^{*k}`.
    pub fn convolution(&self, folds: u32, cap: u64) -> Result<Convolution> {
        if folds == 0 {
            return Err(Error::InvalidParameter("convolution order must be at least 1".into()));
        }
        let needed = composition_count(folds, self.components());
        if needed > cap as u128 {
            return Err(Error::ConvolutionTooLarge { terms: needed, cap });
        }
        let ln_weights: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let ln_k_fact = ln_factorial(folds as u64);
        let mut terms = Vec::with_capacity(needed as usize);
        for_each_composition(folds, self.components(), |counts| {
            let mut ln_w = ln_k_fact;
            let mut mean = 0.0;
            for ((&c, lw), mu) in counts.iter().zip(&ln_weights).zip(&self.means) {
                if c > 0 {
                    ln_w += c as f64 * lw - ln_factorial(c as u64);
                    mean += c as f64 * mu;
                }
            }
            if ln_w > f64::NEG_INFINITY {
                terms.push(ConvolutionTerm { ln_weight: ln_w, mean });
            }
        });
        Ok(Convolution {
            folds,
            variance: folds as f64 / self.precision,
            terms,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionTerm {
    pub ln_weight: f64,
    pub mean: f64,
}

/// `f^{*k}` as a Gaussian mixture: every term has variance `k/τ`.
#[derive(Debug, Clone)]
pub struct Convolution {
    folds: u32,
    variance: f64,
    terms: Vec<ConvolutionTerm>,
}

impl Convolution {
    pub fn folds(&self) -> u32 {
        self.folds
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn terms(&self) -> &[ConvolutionTerm] {
        &self.terms
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let var = self.variance;
        log_sum_exp(
            self.terms
                .iter()
                .map(move |t| t.ln_weight + ln_normal_pdf(x, t.mean, var)),
        )
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

/// `f(x)`.
pub fn mixture_pdf(f: &MixtureDensity, x: f64) -> f64 {
    f.pdf(x)
}

/// `f^{*k}(x)`, refusing expansions above [`DEFAULT_CONVOLUTION_CAP`] terms.
pub fn convolution_pdf(f: &MixtureDensity, k: u32, x: f64) -> Result<f64> {
    Ok(f.convolution(k, DEFAULT_CONVOLUTION_CAP)?.pdf(x))
}

/// `λ = Σ ψ_j` and `ρ_j = ψ_j / λ`.
pub fn reparametrise(psi: &[f64]) -> Result<(f64, Vec<f64>)> {
    if psi.is_empty() {
        return Err(Error::InvalidParameter("ψ must have at least one entry".into()));
    }
    if let Some(bad) = psi.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "intensities must be positive, got {bad}"
        )));
    }
    let lambda: f64 = psi.iter().sum();
    Ok((lambda, psi.iter().map(|p| p / lambda).collect()))
}

/// Sampler parameter `θ = (ψ, μ, τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    psi: Vec<f64>,
    mu: Vec<f64>,
    tau: f64,
}

impl ModelParams {
    pub fn new(psi: Vec<f64>, mu: Vec<f64>, tau: f64) -> Result<Self> {
        reparametrise(&psi)?;
        if psi.len() != mu.len() {
            return Err(Error::InvalidParameter(format!(
                "{} intensities but {} means",
                psi.len(),
                mu.len()
            )));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("means must be finite".into()));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "precision must be positive, got {tau}"
            )));
        }
        Ok(Self { psi, mu, tau })
    }

    /// `ψ_j = λ ρ_j`.
    pub fn from_density(lambda: f64, f: &MixtureDensity) -> Result<Self> {
        let psi = f.weights().iter().map(|w| lambda * w).collect();
        Self::new(psi, f.means().to_vec(), f.precision())
    }

    pub fn components(&self) -> usize {
        self.psi.len()
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Total jump intensity `λ = Σ ψ_j`.
    pub fn lambda(&self) -> f64 {
        self.psi.iter().sum()
    }

    /// Mixture weights `ρ_j = ψ_j / λ`.
    pub fn weights(&self) -> Vec<f64> {
        let lambda = self.lambda();
        self.psi.iter().map(|p| p / lambda).collect()
    }

    pub fn jump_density(&self) -> MixtureDensity {
        MixtureDensity {
            weights: self.weights(),
            means: self.mu.clone(),
            precision: self.tau,
        }
    }
}

/// `a_m(x) = x^m / (m! (e^x - 1))`.
pub fn series_weight(m: usize, lambda_delta: f64) -> f64 {
    ln_series_weight(m, lambda_delta).exp()
}

fn ln_series_weight(m: usize, x: f64) -> f64 {
    m as f64 * x.ln() - ln_factorial(m as u64) - x.exp_m1().ln()
}

/// `Σ_{m > m_max} a_m(x)`, summed directly (no `1 - Σ` cancellation).
pub fn series_tail(m_max: usize, lambda_delta: f64) -> f64 {
    let mut m = m_max + 1;
    let mut term = series_weight(m, lambda_delta);
    let mut sum = 0.0;
    while term > 0.0 {
        sum += term;
        if m as f64 > lambda_delta && term < sum * 1e-17 {
            break;
        }
        m += 1;
        term *= lambda_delta / m as f64;
    }
    sum
}

/// Law `Q^Δ` of a CPP increment over a window of length `Δ`, with the
/// series for its continuous part truncated at `m_max` convolutions.
#[derive(Debug, Clone)]
pub struct IncrementLaw {
    params: ModelParams,
    delta: f64,
    m_max: usize,
    tail: f64,
    /// `ln(e^{-λΔ} (λΔ)^m / m!)` for `m = 1..=m_max`.
    ln_poisson: Vec<f64>,
    convolutions: Vec<Convolution>,
}

impl IncrementLaw {
    /// Picks the smallest truncation whose neglected tail is below
    /// [`DEFAULT_TAIL_TOLERANCE`].
    pub fn new(params: ModelParams, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let x = params.lambda() * delta;
        let mut m_max = 1;
        while series_tail(m_max, x) >= DEFAULT_TAIL_TOLERANCE {
            m_max += 1;
        }
        Self::with_truncation(params, delta, m_max, DEFAULT_TAIL_TOLERANCE)
    }

    /// Uses exactly `m_max` terms; fails if the neglected tail exceeds
    /// `tolerance`.
    pub fn with_truncation(
        params: ModelParams,
        delta: f64,
        m_max: usize,
        tolerance: f64,
    ) -> Result<Self> {
        check_delta(delta)?;
        if m_max == 0 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        let x = params.lambda() * delta;
        let tail = series_tail(m_max, x);
        if tail > tolerance {
            return Err(Error::Truncation {
                m_max,
                tail,
                tolerance,
            });
        }
        let f = params.jump_density();
        let convolutions = (1..=m_max)
            .map(|m| f.convolution(m as u32, DEFAULT_CONVOLUTION_CAP))
            .collect::<Result<Vec<_>>>()?;
        let ln_poisson = (1..=m_max)
            .map(|m| -x + m as f64 * x.ln() - ln_factorial(m as u64))
            .collect();
        Ok(Self {
            params,
            delta,
            m_max,
            tail,
            ln_poisson,
            convolutions,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn truncation(&self) -> usize {
        self.m_max
    }

    /// Neglected series mass `Σ_{m > M} a_m(λΔ)`.
    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    /// Pointwise bound on the truncation error of the continuous density:
    /// tail mass times the largest height of any `f^{*m}`, `m > M`.
    pub fn truncation_bound(&self) -> f64 {
        let x = self.params.lambda() * self.delta;
        let height = (self.params.tau() / (2.0 * std::f64::consts::PI * (self.m_max + 1) as f64)).sqrt();
        -(-x).exp_m1() * self.tail * height
    }

    /// Weight `e^{-λΔ}` of the atom at zero.
    pub fn atom(&self) -> f64 {
        (-self.params.lambda() * self.delta).exp()
    }

    /// `ln` of the continuous part `(1 - e^{-λΔ}) Σ_m a_m f^{*m}(z)`.
    pub fn continuous_ln_pdf(&self, z: f64) -> f64 {
        log_sum_exp(
            self.ln_poisson
                .iter()
                .zip(&self.convolutions)
                .map(move |(lp, conv)| lp + conv.ln_pdf(z)),
        )
    }

    pub fn continuous_pdf(&self, z: f64) -> f64 {
        self.continuous_ln_pdf(z).exp()
    }

    /// Density with respect to Lebesgue measure plus a unit atom at zero.
    pub fn pdf(&self, z: f64) -> f64 {
        if z == 0.0 {
            self.atom()
        } else {
            self.continuous_pdf(z)
        }
    }

    /// Density of a nonzero increment conditional on being nonzero.
    pub fn nonzero_ln_pdf(&self, z: f64) -> f64 {
        let x = self.params.lambda() * self.delta;
        self.continuous_ln_pdf(z) - (-(-x).exp_m1()).ln()
    }

    /// `λΔ E[Y]`.
    pub fn mean(&self) -> f64 {
        self.params.lambda() * self.delta * self.params.jump_density().mean()
    }

    /// `λΔ E[Y²]`.
    pub fn variance(&self) -> f64 {
        self.params.lambda() * self.delta * self.params.jump_density().second_moment()
    }

    /// Interval holding all but a negligible part of the continuous mass.
    pub fn window(&self) -> (f64, f64) {
        let m = self.m_max as f64;
        let lo_mu = self.params.mu().iter().copied().fold(f64::INFINITY, f64::min);
        let hi_mu = self.params.mu().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = lo_mu.min(m * lo_mu);
        let hi = hi_mu.max(m * hi_mu);
        let pad = WINDOW_SDS * (m / self.params.tau()).sqrt();
        (lo - pad, hi + pad)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "duration must be positive, got {delta}"
        )))
    }
}

pub fn increment_pdf(law: &IncrementLaw, z: f64) -> f64 {
    law.pdf(z)
}

/// Continuous-observation log-likelihood `|V| ln λ - λT + Σ ln f(J_i)` of a
/// path with `jumps = [(time, size)]` observed on `[0, T]`.
pub fn log_continuous_likelihood(
    params: &ModelParams,
    jumps: &[(f64, f64)],
    horizon: f64,
) -> Result<f64> {
    check_delta(horizon)?;
    if let Some((t, _)) = jumps.iter().find(|(t, _)| !(0.0..=horizon).contains(t)) {
        return Err(Error::InvalidParameter(format!(
            "jump time {t} outside [0, {horizon}]"
        )));
    }
    let lambda = params.lambda();
    let f = params.jump_density();
    let jump_term: f64 = jumps.iter().map(|(_, y)| f.ln_pdf(*y)).sum();
    Ok(jumps.len() as f64 * lambda.ln() - lambda * horizon + jump_term)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn two_component() -> MixtureDensity {
        MixtureDensity::new(vec![0.8, 0.2], vec![2.0, -1.0], 1.0).unwrap()
    }

    #[test]
    fn standard_normal_at_mode() {
        let f = MixtureDensity::normal(0.0, 1.0).unwrap();
        assert_close(mixture_pdf(&f, 0.0), 0.398_942_280_401_432_7, 1e-15);
        assert_close(f.pdf(1.7), f.pdf(-1.7), 0.0);
    }

    #[test]
    fn two_component_value() {
        // 0.8 φ(0) + 0.2 φ(3)
        let direct = (0.8 + 0.2 * (-4.5f64).exp()) / (2.0 * std::f64::consts::PI).sqrt();
        assert_close(two_component().pdf(2.0), direct, 1e-15);
        assert_close(two_component().pdf(2.0), 0.320_040_2, 1e-7);
    }

    #[test]
    fn self_convolution_of_standard_normal() {
        let f = MixtureDensity::normal(0.0, 1.0).unwrap();
        assert_close(convolution_pdf(&f, 2, 0.0).unwrap(), 0.282_094_8, 1e-7);
        assert_close(convolution_pdf(&f, 1, 0.3).unwrap(), f.pdf(0.3), 1e-15);
    }

    #[test]
    fn rejects_invalid_mixtures() {
        assert!(MixtureDensity::new(vec![0.5, 0.4], vec![0.0, 1.0], 1.0).is_err());
        assert!(MixtureDensity::new(vec![1.0], vec![0.0], 0.0).is_err());
        assert!(MixtureDensity::new(vec![], vec![], 1.0).is_err());
        assert!(MixtureDensity::new(vec![1.2, -0.2], vec![0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn convolution_cap_is_enforced() {
        let f = MixtureDensity::new(vec![0.25; 4], vec![0.0, 1.0, 2.0, 3.0], 1.0).unwrap();
        // C(k + 3, 3) > 10^6 once k ≥ 179.
        assert!(matches!(
            f.convolution(200, DEFAULT_CONVOLUTION_CAP),
            Err(Error::ConvolutionTooLarge { .. })
        ));
        // C(13, 3) = 286 terms for k = 10.
        assert!(f.convolution(10, 286).is_ok());
        assert!(f.convolution(10, 285).is_err());
        assert!(f.convolution(0, 10).is_err());
    }

    #[test]
    fn composition_enumeration_is_complete() {
        for parts in 1..5 {
            for total in 0..7 {
                let mut seen = 0u128;
                for_each_composition(total, parts, |c| {
                    assert_eq!(c.iter().sum::<u32>(), total);
                    seen += 1;
                });
                assert_eq!(seen, composition_count(total, parts));
            }
        }
        assert_eq!(composition_count(10, 2), 11);
        assert_eq!(composition_count(3, 3), 10);
    }

    #[test]
    fn reparametrisation_examples() {
        let (lambda, rho) = reparametrise(&[0.8, 0.2]).unwrap();
        assert_close(lambda, 1.0, 1e-15);
        assert_close(rho[0], 0.8, 1e-15);
        let (lambda, rho) = reparametrise(&[2.4, 0.6]).unwrap();
        assert_close(lambda, 3.0, 1e-15);
        assert_close(rho[0], 0.8, 1e-15);
        assert_close(rho[1], 0.2, 1e-15);
        let (lambda, rho) = reparametrise(&[1.7]).unwrap();
        assert_eq!((lambda, rho), (1.7, vec![1.0]));
        assert!(reparametrise(&[1.0, 0.0]).is_err());
        assert!(reparametrise(&[-1.0]).is_err());
    }

    #[test]
    fn atom_and_first_series_weight() {
        let params = ModelParams::new(vec![1.0], vec![0.0], 1.0).unwrap();
        let law = IncrementLaw::new(params, 1.0).unwrap();
        assert_close(increment_pdf(&law, 0.0), 0.367_879_4, 1e-7);
        assert_close(series_weight(1, 1.0), 0.581_976_7, 1e-7);
        assert!(law.tail_mass() < DEFAULT_TAIL_TOLERANCE);
        assert!(series_tail(law.truncation() - 1, 1.0) >= DEFAULT_TAIL_TOLERANCE);
    }

    #[test]
    fn explicit_truncation_reports_tail() {
        let params = ModelParams::new(vec![2.4, 0.6], vec![2.0, -1.0], 1.0).unwrap();
        let err = IncrementLaw::with_truncation(params.clone(), 1.0, 3, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Truncation { m_max: 3, .. }));
        assert!(IncrementLaw::with_truncation(params, 1.0, 40, 1e-12).is_ok());
    }

    #[test]
    fn series_weights_sum_to_one() {
        for x in [0.01, 0.5, 1.0, 3.0, 12.0] {
            let head: f64 = (1..=5).map(|m| series_weight(m, x)).sum();
            assert_close(head + series_tail(5, x), 1.0, 1e-13);
        }
    }

    #[test]
    fn continuous_likelihood_examples() {
        let params = ModelParams::new(vec![1.0], vec![0.0], 1.0).unwrap();
        assert_close(log_continuous_likelihood(&params, &[], 2.0).unwrap(), -2.0, 1e-15);
        assert_close(
            log_continuous_likelihood(&params, &[(0.5, 2.0)], 1.0).unwrap(),
            -3.918_938_5,
            1e-7
        );
        let one = log_continuous_likelihood(&params, &[(0.5, 2.0)], 1.0).unwrap();
        let two = log_continuous_likelihood(&params, &[(0.5, 2.0)], 2.0).unwrap();
        assert_close(one - two, params.lambda(), 1e-14);
        assert!(log_continuous_likelihood(&params, &[(1.5, 2.0)], 1.0).is_err());
    }
}
