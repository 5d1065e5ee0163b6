//! Non-parametric Bayesian decompounding of a discretely observed compound
//! Poisson process (CPP).
//!
//! The crate covers the whole workflow:
//!
//! - [`model`]: Gaussian-mixture jump densities, their convolutions and the
//!   law of a CPP increment (an atom at zero plus a continuous part).
//! - [`simulate`]: CPP paths, discretisation and direct simulation of
//!   increments together with the latent per-type jump counts.
//! - [`distances`]: Hellinger, Kullback-Leibler and `V` divergences between
//!   jump densities and between increment laws, plus their small-`Δ` limits.
//! - [`sampler`]: the data-augmentation Metropolis-within-Gibbs sampler that
//!   imputes per-segment jump-type counts and updates `(ψ, μ, τ)` conjugately.
//! - [`diagnostics`]: trace summaries, autocorrelation, effective sample size,
//!   posterior-mean densities and an empirical contraction-rate harness.
//! - [`config`], [`io`] and [`cli`]: the `decompound` command line tool.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod distances;
mod error;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{IncrementLaw, MixtureDensity, ModelParams};
pub use sampler::{AuxiliaryState, Hyperparameters, Trace};
pub use simulate::{CppPath, ObservationSet};
