use crate::model::ModelParams;
use crate::simulate::ObservationSet;
use crate::{Error, Result};

/// Prior hyperparameters:
/// `ψ_j ~ Gamma(α₀, β₀)` iid, `τ ~ Gamma(α₁, β₁)`,
/// `μ | τ ~ N(ξ, (τκ)⁻¹ I)`. Gamma distributions use shape and rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub xi: Vec<f64>,
    pub kappa: f64,
}

impl Hyperparameters {
    /// `α₀ = β₀ = α₁ = β₁ = κ = 1` and `ξ = 0`.
    pub fn unit(components: usize) -> Self {
        Self {
            alpha0: 1.0,
            beta0: 1.0,
            alpha1: 1.0,
            beta1: 1.0,
            xi: vec![0.0; components],
            kappa: 1.0,
        }
    }

    pub fn components(&self) -> usize {
        self.xi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("alpha0", self.alpha0),
            ("beta0", self.beta0),
            ("alpha1", self.alpha1),
            ("beta1", self.beta1),
            ("kappa", self.kappa),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if self.xi.is_empty() || self.xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("ξ must be a nonempty finite vector".into()));
        }
        Ok(())
    }
}

/// Per-type jump counts `a_i = (n_i1, …, n_iJ)` for every segment with a
/// nonzero increment. Row `k` belongs to data index `segments()[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxiliaryState {
    components: usize,
    segments: Vec<usize>,
    counts: Vec<u32>,
}

impl AuxiliaryState {
    pub fn new(components: usize, segments: Vec<usize>, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != components) {
            return Err(Error::InvalidParameter(format!(
                "every count row needs {components} entries"
            )));
        }
        Self::from_flat(components, segments, rows.concat())
    }

    pub(crate) fn from_flat(components: usize, segments: Vec<usize>, counts: Vec<u32>) -> Result<Self> {
        if components == 0 || counts.len() != components * segments.len() {
            return Err(Error::InvalidParameter("count table has the wrong shape".into()));
        }
        if segments.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("segment indices must be increasing".into()));
        }
        let state = Self {
            components,
            segments,
            counts,
        };
        if let Some(k) = (0..state.len()).find(|&k| state.jumps(k) == 0) {
            return Err(Error::Invariant(format!(
                "segment {} has a nonzero increment but no jumps",
                state.segments[k]
            )));
        }
        Ok(state)
    }

    pub fn empty(components: usize) -> Self {
        Self {
            components,
            segments: Vec::new(),
            counts: Vec::new(),
        }
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[usize] {
        &self.segments
    }

    pub fn counts(&self, k: usize) -> &[u32] {
        &self.counts[k * self.components..(k + 1) * self.components]
    }

    pub(crate) fn counts_mut(&mut self, k: usize) -> &mut [u32] {
        &mut self.counts[k * self.components..(k + 1) * self.components]
    }

    /// `n_i` for row `k`.
    pub fn jumps(&self, k: usize) -> u32 {
        self.counts(k).iter().sum()
    }

    /// `s_j = Σ_i n_ij`.
    pub fn type_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.components];
        for row in self.counts.chunks_exact(self.components) {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += *c as u64;
            }
        }
        totals
    }

    /// `s = Σ_j s_j`.
    pub fn total_jumps(&self) -> u64 {
        self.counts.iter().map(|c| *c as u64).sum()
    }

    /// `(data index, counts)` pairs.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[u32])> {
        self.segments
            .iter()
            .copied()
            .zip(self.counts.chunks_exact(self.components))
    }

    /// True when the rows cover exactly the nonzero increments of `data`.
    pub fn matches(&self, data: &ObservationSet) -> bool {
        self.segments == data.nonzero()
    }
}

/// Sampler state between sweeps.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub params: ModelParams,
    pub aux: AuxiliaryState,
    /// Completed sweeps.
    pub iteration: usize,
    /// Per-row accepted segment proposals.
    pub accepted: Vec<u64>,
    /// Per-row segment proposals.
    pub proposed: Vec<u64>,
}

impl ChainState {
    pub fn new(params: ModelParams, aux: AuxiliaryState) -> Self {
        let rows = aux.len();
        Self {
            params,
            aux,
            iteration: 0,
            accepted: vec![0; rows],
            proposed: vec![0; rows],
        }
    }

    /// Accepted over proposed segment moves, pooled over segments; `None`
    /// before any proposal.
    pub fn acceptance_rate(&self) -> Option<f64> {
        let (accepted, proposed) = self.tallies();
        (proposed > 0).then(|| accepted as f64 / proposed as f64)
    }

    /// Total `(accepted, proposed)` segment moves.
    pub fn tallies(&self) -> (u64, u64) {
        (self.accepted.iter().sum(), self.proposed.iter().sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub psi: Vec<f64>,
    pub mu: Vec<f64>,
    pub tau: f64,
    /// `Σ ψ_j` of the stored `psi`.
    pub lambda: f64,
}

impl TraceRow {
    pub fn new(iteration: usize, params: &ModelParams) -> Self {
        Self {
            iteration,
            psi: params.psi().to_vec(),
            mu: params.mu().to_vec(),
            tau: params.tau(),
            lambda: params.lambda(),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.psi.clone(), self.mu.clone(), self.tau)
    }
}

/// Recorded iterates. `burn_in` marks how many leading iterations the run
/// asked to discard; rows are kept regardless so traces show the full run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub components: usize,
    pub thin: usize,
    pub burn_in: usize,
    pub rows: Vec<TraceRow>,
    /// Pooled segment acceptance rate over the sweeps after burn-in, when
    /// known.
    pub acceptance_rate: Option<f64>,
    /// Pooled segment acceptance rate over the whole run, when known.
    pub acceptance_rate_overall: Option<f64>,
}

impl Trace {
    pub fn new(components: usize, thin: usize, burn_in: usize) -> Self {
        Self {
            components,
            thin,
            burn_in,
            rows: Vec::new(),
            acceptance_rate: None,
            acceptance_rate_overall: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column names: `iter, psi_1..psi_J, mu_1..mu_J, tau, lambda`.
    pub fn header(&self) -> Vec<String> {
        let j = self.components;
        std::iter::once("iter".to_string())
            .chain((1..=j).map(|k| format!("psi_{k}")))
            .chain((1..=j).map(|k| format!("mu_{k}")))
            .chain(["tau".to_string(), "lambda".to_string()])
            .collect()
    }

    /// Values of one parameter column, in row order.
    pub fn column(&self, param: TraceParam) -> Vec<f64> {
        self.rows.iter().map(|r| param.get(r)).collect()
    }

    /// All parameter columns, in header order.
    pub fn params(&self) -> Vec<TraceParam> {
        let j = self.components;
        (0..j)
            .map(TraceParam::Psi)
            .chain((0..j).map(TraceParam::Mu))
            .chain([TraceParam::Tau, TraceParam::Lambda])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceParam {
    Psi(usize),
    Mu(usize),
    Tau,
    Lambda,
}

impl TraceParam {
    pub fn get(self, row: &TraceRow) -> f64 {
        match self {
            Self::Psi(j) => row.psi[j],
            Self::Mu(j) => row.mu[j],
            Self::Tau => row.tau,
            Self::Lambda => row.lambda,
        }
    }

    pub fn name(self) -> String {
        match self {
            Self::Psi(j) => format!("psi_{}", j + 1),
            Self::Mu(j) => format!("mu_{}", j + 1),
            Self::Tau => "tau".into(),
            Self::Lambda => "lambda".into(),
        }
    }
}
