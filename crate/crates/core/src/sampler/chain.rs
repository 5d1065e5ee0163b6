use super::params::{update_mu_tau, update_psi};
use super::segments::{init_aux, update_segments, InitPolicy};
use super::state::{ChainState, Hyperparameters, Trace, TraceRow};
use crate::model::ModelParams;
use crate::rng::Streams;
use crate::simulate::ObservationSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    pub iterations: usize,
    /// Informational: stored in the trace, rows are recorded regardless.
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub init: InitPolicy,
}

impl ChainConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            burn_in: 0,
            thin: 1,
            seed,
            init: InitPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("need at least one iteration".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be at least 1".into()));
        }
        Ok(())
    }
}

/// Independent random streams for the three blocks of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct ChainStreams {
    pub segments: Streams,
    pub psi: Streams,
    pub mu_tau: Streams,
}

impl ChainStreams {
    pub fn new(seed: u64) -> Self {
        let root = Streams::new(seed).domain("chain");
        Self {
            segments: root.domain("segments"),
            psi: root.domain("psi"),
            mu_tau: root.domain("mu_tau"),
        }
    }
}

/// One full sweep: segments, then `ψ`, then `(μ, τ)`. Advances
/// `state.iteration` first so sweep `t` uses streams indexed by `t`.
pub fn sweep(
    state: &mut ChainState,
    data: &ObservationSet,
    hyper: &Hyperparameters,
    streams: &ChainStreams,
) -> Result<()> {
    state.iteration += 1;
    let t = state.iteration as u64;
    update_segments(state, data, &streams.segments)?;
    let psi = update_psi(&state.aux, hyper, data.total_time(), &mut streams.psi.rng(t));
    let (mu, tau) = update_mu_tau(data, &state.aux, hyper, &mut streams.mu_tau.rng(t))?;
    state.params = ModelParams::new(psi, mu, tau)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub trace: Trace,
    pub state: ChainState,
}

/// Runs the sampler from `initial`, recording every `thin`-th iterate.
pub fn run_chain(
    data: &ObservationSet,
    hyper: &Hyperparameters,
    initial: ModelParams,
    config: &ChainConfig,
) -> Result<ChainOutput> {
    config.validate()?;
    hyper.validate()?;
    if hyper.components() != initial.components() {
        return Err(Error::InvalidParameter(format!(
            "prior has {} components, initial parameters have {}",
            hyper.components(),
            initial.components()
        )));
    }
    let aux = init_aux(data, &initial, config.init, config.seed)?;
    let mut state = ChainState::new(initial, aux);
    let streams = ChainStreams::new(config.seed);
    let mut trace = Trace::new(hyper.components(), config.thin, config.burn_in);
    trace.rows.reserve(config.iterations / config.thin);
    let mut at_burn_in = (0, 0);
    for _ in 0..config.iterations {
        sweep(&mut state, data, hyper, &streams).map_err(|e| Error::Chain {
            iteration: state.iteration,
            source: Box::new(e),
        })?;
        if state.iteration % config.thin == 0 {
            trace.rows.push(TraceRow::new(state.iteration, &state.params));
        }
        if state.iteration == config.burn_in {
            at_burn_in = state.tallies();
        }
    }
    let (accepted, proposed) = state.tallies();
    let after = proposed - at_burn_in.1;
    trace.acceptance_rate = (after > 0).then(|| (accepted - at_burn_in.0) as f64 / after as f64);
    trace.acceptance_rate_overall = state.acceptance_rate();
    Ok(ChainOutput { trace, state })
}

/// Data-driven starting point with `J` components: `λ` from the fraction of
/// zero increments, means at evenly spaced quantiles of the nonzero
/// increments divided by the expected jump count of a nonzero segment, and
/// `τ` from their spread.
pub fn initial_params(data: &ObservationSet, components: usize) -> Result<ModelParams> {
    if components == 0 {
        return Err(Error::InvalidParameter("need at least one component".into()));
    }
    let n = data.len() as f64;
    let mean_delta = data.total_time() / n;
    let floor = 0.5 / n;
    let zero_fraction = (1.0 - data.nonzero().len() as f64 / n).clamp(floor, 1.0 - floor);
    let lambda = -zero_fraction.ln() / mean_delta;
    let x = lambda * mean_delta;
    let jumps = x / -(-x).exp_m1();

    let mut z: Vec<f64> = data.nonzero().iter().map(|&i| data.increments()[i]).collect();
    z.sort_by(f64::total_cmp);
    let (mu, tau) = if z.len() < 2 {
        (vec![z.first().copied().unwrap_or(0.0) / jumps; components], 1.0)
    } else {
        let quantile = |p: f64| {
            let h = p * (z.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(z.len() - 1);
            z[lo] + (h - lo as f64) * (z[hi] - z[lo])
        };
        let mu = (0..components)
            .map(|j| quantile((j as f64 + 0.5) / components as f64) / jumps)
            .collect();
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
        let tau = if var > 0.0 { jumps / var } else { 1.0 };
        (mu, tau)
    };
    ModelParams::new(vec![lambda / components as f64; components], mu, tau)
}
