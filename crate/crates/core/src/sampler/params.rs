//! Conjugate updates of `ψ` and `(μ, τ)` given the latent counts.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::state::{AuxiliaryState, Hyperparameters};
use crate::simulate::ObservationSet;
use crate::{Error, Result};

/// Relative slack allowed on `R - q'P⁻¹q` before it counts as negative.
const RESIDUAL_SLACK: f64 = 1e-10;

/// Gamma distribution in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPosterior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPosterior {
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Gamma::new(self.shape, 1.0 / self.rate)
            .expect("shape and rate are positive")
            .sample(rng)
    }
}

/// `ψ_j | 𝐚 ~ Gamma(α₀ + s_j, β₀ + T)`, independently over `j`.
pub fn psi_posterior(aux: &AuxiliaryState, hyper: &Hyperparameters, total_time: f64) -> Vec<GammaPosterior> {
    aux.type_totals()
        .into_iter()
        .map(|s| GammaPosterior {
            shape: hyper.alpha0 + s as f64,
            rate: hyper.beta0 + total_time,
        })
        .collect()
}

pub fn update_psi<R: Rng + ?Sized>(
    aux: &AuxiliaryState,
    hyper: &Hyperparameters,
    total_time: f64,
    rng: &mut R,
) -> Vec<f64> {
    psi_posterior(aux, hyper, total_time)
        .iter()
        // A draw can underflow to zero for tiny shapes.
        .map(|g| g.sample(rng).max(f64::MIN_POSITIVE))
        .collect()
}

/// Quantities of the joint `(μ, τ)` conditional.
///
/// `τ ~ Gamma(α₁ + I/2, β₁ + (R - q'P⁻¹q)/2)` and `μ | τ ~ N(P⁻¹q, τ⁻¹P⁻¹)`.
#[derive(Debug, Clone)]
pub struct MuTauPosterior {
    /// `P = κI + P̃`.
    pub precision: DMatrix<f64>,
    pub q: DVector<f64>,
    pub r: f64,
    /// `P⁻¹q`.
    pub mean: DVector<f64>,
    pub shape: f64,
    pub rate: f64,
    /// `R - q'P⁻¹q` after clamping at zero.
    pub residual: f64,
    /// Set when the residual is exactly zero, so that `rate = β₁`.
    pub degenerate: bool,
    cholesky: Cholesky<f64, Dyn>,
}

pub fn mu_tau_posterior(
    data: &ObservationSet,
    aux: &AuxiliaryState,
    hyper: &Hyperparameters,
) -> Result<MuTauPosterior> {
    let j = aux.components();
    if hyper.components() != j {
        return Err(Error::InvalidParameter(format!(
            "hyperparameters have {} components, counts have {j}",
            hyper.components()
        )));
    }
    let z = data.increments();
    let xi = DVector::from_column_slice(&hyper.xi);
    let mut precision = DMatrix::identity(j, j) * hyper.kappa;
    let mut q = &xi * hyper.kappa;
    let mut r = hyper.kappa * xi.norm_squared();
    for (i, counts) in aux.rows() {
        let n: u32 = counts.iter().sum();
        let w = 1.0 / n as f64;
        for a in 0..j {
            if counts[a] == 0 {
                continue;
            }
            let na = counts[a] as f64;
            for b in 0..j {
                precision[(a, b)] += w * na * counts[b] as f64;
            }
            q[a] += w * na * z[i];
        }
        r += w * z[i] * z[i];
    }
    let cholesky = Cholesky::new(precision.clone()).ok_or(Error::NotPositiveDefinite)?;
    let mean = cholesky.solve(&q);
    let raw = r - q.dot(&mean);
    if raw < -RESIDUAL_SLACK * r.max(1.0) {
        return Err(Error::Invariant(format!("R - q'P⁻¹q = {raw:e} is negative")));
    }
    let residual = raw.max(0.0);
    Ok(MuTauPosterior {
        precision,
        q,
        r,
        mean,
        shape: hyper.alpha1 + aux.len() as f64 / 2.0,
        rate: hyper.beta1 + residual / 2.0,
        residual,
        degenerate: residual == 0.0,
        cholesky,
    })
}

impl MuTauPosterior {
    pub fn tau(&self) -> GammaPosterior {
        GammaPosterior {
            shape: self.shape,
            rate: self.rate,
        }
    }

    /// Lower Cholesky factor `L` of `P`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.cholesky.l()
    }

    /// Draws `τ`, then `μ = P⁻¹q + L⁻ᵀε/√τ` with `ε ~ N(0, I)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let tau = self.tau().sample(rng).max(f64::MIN_POSITIVE);
        let eps = DVector::from_iterator(
            self.mean.len(),
            (0..self.mean.len()).map(|_| rng.sample::<f64, _>(StandardNormal)),
        );
        let shift = self
            .cholesky
            .l_dirty()
            .tr_solve_lower_triangular(&eps)
            .expect("Cholesky factor has a positive diagonal");
        let mu = &self.mean + shift / tau.sqrt();
        (mu.iter().copied().collect(), tau)
    }
}

pub fn update_mu_tau<R: Rng + ?Sized>(
    data: &ObservationSet,
    aux: &AuxiliaryState,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    Ok(mu_tau_posterior(data, aux, hyper)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    #[test]
    fn psi_shape_and_rate() {
        let aux = AuxiliaryState::new(2, vec![0, 1], vec![vec![2, 0], vec![1, 3]]).unwrap();
        let post = psi_posterior(&aux, &Hyperparameters::unit(2), 9.0);
        assert_eq!(post[0], GammaPosterior { shape: 4.0, rate: 10.0 });
        assert_eq!(post[1], GammaPosterior { shape: 4.0, rate: 10.0 });
    }

    #[test]
    fn precision_matrix_example() {
        let data = ObservationSet::equidistant(1.0, vec![1.5]).unwrap();
        let aux = AuxiliaryState::new(2, vec![0], vec![vec![2, 1]]).unwrap();
        let post = mu_tau_posterior(&data, &aux, &Hyperparameters::unit(2)).unwrap();
        let expected = [[7.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 4.0 / 3.0]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((post.precision[(a, b)] - expected[a][b]).abs() < 1e-15);
            }
        }
        assert!((post.q[0] - 1.0).abs() < 1e-15);
        assert!((post.q[1] - 0.5).abs() < 1e-15);
        assert!((post.r - 0.75).abs() < 1e-15);
        assert!(post.residual >= 0.0);
    }

    #[test]
    fn empty_counts_give_the_prior() {
        let data = ObservationSet::equidistant(1.0, vec![0.0, 0.0]).unwrap();
        let mut hyper = Hyperparameters::unit(2);
        hyper.alpha1 = 2.5;
        hyper.beta1 = 0.7;
        hyper.kappa = 3.0;
        let post = mu_tau_posterior(&data, &AuxiliaryState::empty(2), &hyper).unwrap();
        assert_eq!((post.shape, post.rate), (2.5, 0.7));
        assert!(post.degenerate);
        assert_eq!(post.mean.iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
    }

    #[test]
    fn sample_has_the_conditional_covariance() {
        // With τ fixed by a huge shape/rate pair the μ draws have covariance
        // P⁻¹/τ.
        let data = ObservationSet::equidistant(1.0, vec![1.5, -0.3, 2.2]).unwrap();
        let aux = AuxiliaryState::new(2, vec![0, 1, 2], vec![vec![2, 1], vec![0, 1], vec![1, 0]]).unwrap();
        let mut hyper = Hyperparameters::unit(2);
        hyper.alpha1 = 1e9;
        hyper.beta1 = 1e9;
        let post = mu_tau_posterior(&data, &aux, &hyper).unwrap();
        let inv = post.precision.clone().try_inverse().unwrap();
        let mut rng = Streams::new(3).rng(0);
        let n = 200_000;
        let mut sum = [0.0; 2];
        let mut cross = [[0.0; 2]; 2];
        for _ in 0..n {
            let (mu, _) = post.sample(&mut rng);
            for a in 0..2 {
                sum[a] += mu[a];
                for b in 0..2 {
                    cross[a][b] += mu[a] * mu[b];
                }
            }
        }
        for a in 0..2 {
            let m = sum[a] / n as f64;
            assert!((m - post.mean[a]).abs() < 0.01);
            for b in 0..2 {
                let cov = cross[a][b] / n as f64 - m * sum[b] / n as f64;
                assert!((cov - inv[(a, b)]).abs() < 0.01, "{a}{b}: {cov}");
            }
        }
    }
}
