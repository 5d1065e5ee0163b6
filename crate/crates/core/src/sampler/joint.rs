//! Log density of `(θ, z, 𝐚)` under the hierarchical model.

use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use super::segments::ln_segment_likelihood;
use super::state::{AuxiliaryState, Hyperparameters};
use crate::model::{ln_normal_pdf, ModelParams};
use crate::simulate::ObservationSet;

fn ln_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// `ln π(θ)`: independent Gamma priors on `ψ_j` and `τ`, and
/// `μ_j | τ ~ N(ξ_j, 1/(τκ))`.
pub fn log_prior(params: &ModelParams, hyper: &Hyperparameters) -> f64 {
    let tau = params.tau();
    let psi: f64 = params
        .psi()
        .iter()
        .map(|&p| ln_gamma_pdf(p, hyper.alpha0, hyper.beta0))
        .sum();
    let mu: f64 = params
        .mu()
        .iter()
        .zip(&hyper.xi)
        .map(|(&m, &x)| ln_normal_pdf(m, x, 1.0 / (tau * hyper.kappa)))
        .sum();
    psi + ln_gamma_pdf(tau, hyper.alpha1, hyper.beta1) + mu
}

/// `ln p(θ, z, 𝐚)`. Segments outside the nonzero set carry no jumps and
/// contribute `-λΔ_i`. Returns `-∞` when `aux` does not cover exactly the
/// nonzero increments of `data`.
pub fn log_joint(
    params: &ModelParams,
    data: &ObservationSet,
    aux: &AuxiliaryState,
    hyper: &Hyperparameters,
) -> f64 {
    if !aux.matches(data) || aux.components() != params.components() {
        return f64::NEG_INFINITY;
    }
    let lambda = params.lambda();
    let mut total = log_prior(params, hyper) - lambda * data.total_time();
    for (i, counts) in aux.rows() {
        let delta = data.durations()[i];
        total += ln_segment_likelihood(params, data.increments()[i], counts);
        for (&n, &psi) in counts.iter().zip(params.psi()) {
            total += n as f64 * (psi * delta).ln() - ln_factorial(n as u64);
        }
    }
    total
}
