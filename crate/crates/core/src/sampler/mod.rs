//! Data-augmentation Metropolis-within-Gibbs sampler.
//!
//! Each sweep updates the latent per-type jump counts of every segment with
//! a nonzero increment by an independence Metropolis–Hastings step, then
//! draws `ψ` and `(μ, τ)` from their conjugate conditionals.

mod chain;
mod joint;
mod params;
mod segments;
mod state;

pub use chain::{initial_params, run_chain, sweep, ChainConfig, ChainOutput, ChainStreams};
pub use joint::{log_joint, log_prior};
pub use params::{mu_tau_posterior, psi_posterior, update_mu_tau, update_psi, GammaPosterior, MuTauPosterior};
pub use segments::{
    accept_ratio, init_aux, ln_accept_ratio, ln_proposal_mass, propose_segment, update_segments, InitPolicy,
    ZeroTruncatedPoisson,
};
pub use state::{AuxiliaryState, ChainState, Hyperparameters, Trace, TraceParam, TraceRow};
