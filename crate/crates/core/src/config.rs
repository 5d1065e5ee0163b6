//! Run configuration files.
//!
//! Configurations are TOML documents. Unknown keys are rejected, and every
//! run needs an explicit top-level `seed`. A complete fit configuration:
//!
//! ```toml
//! seed = 1
//! mode = "fit"            # optional; must match the subcommand when given
//!
//! [model]                 # truth for simulation (or `components = J` alone)
//! psi = [0.8, 0.2]
//! mu = [2.0, -1.0]
//! tau = 1.0
//!
//! [data]
//! n = 5000
//! delta = 1.0
//! # path = "increments.csv"  # fit this file instead of simulating
//! # format = "increment_csv" # or "path_csv"
//! # zero_threshold = 0.0
//!
//! [prior]                 # every key defaults to 1, `xi` to zeros
//! alpha0 = 1.0
//!
//! [mcmc]
//! iterations = 15000
//! burn_in = 5000
//! thin = 5
//! # init = "prior_conditioned"  # or "single_nearest_mean"
//! # start = "data"              # or "model"
//! ```
//!
//! The `[distance]`, `[contract]` and `[diagnose]` tables configure the
//! remaining modes. Relative paths are resolved against the directory that
//! holds the configuration file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::diagnostics::{ContractionConfig, DensityEstimate};
use crate::distances::DivergenceKind;
use crate::model::{MixtureDensity, ModelParams};
use crate::sampler::{Hyperparameters, InitPolicy};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Fit,
    Diagnose,
    Distance,
    Contract,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Fit => "fit",
            Mode::Diagnose => "diagnose",
            Mode::Distance => "distance",
            Mode::Contract => "contract",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// Header `delta,z`.
    #[default]
    IncrementCsv,
    /// Header `t,x`; cumulative path values including the start point.
    PathCsv,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "increment_csv" => Ok(Self::IncrementCsv),
            "path_csv" => Ok(Self::PathCsv),
            other => Err(Error::Config(format!("unknown data format `{other}`"))),
        }
    }
}

/// Where the sampler starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPolicy {
    /// Data-driven guess.
    #[default]
    Data,
    /// The `[model]` parameters.
    Model,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    mode: Option<Mode>,
    model: Option<RawModel>,
    data: Option<RawData>,
    prior: Option<RawPrior>,
    mcmc: Option<RawMcmc>,
    distance: Option<RawDistance>,
    contract: Option<RawContract>,
    diagnose: Option<RawDiagnose>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    components: Option<usize>,
    psi: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
    tau: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    n: Option<usize>,
    delta: Option<f64>,
    path: Option<PathBuf>,
    #[serde(default)]
    format: DataFormat,
    #[serde(default)]
    zero_threshold: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    alpha0: Option<f64>,
    beta0: Option<f64>,
    alpha1: Option<f64>,
    beta1: Option<f64>,
    xi: Option<Vec<f64>>,
    kappa: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum RawInit {
    PriorConditioned,
    SingleNearestMean,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMcmc {
    iterations: usize,
    #[serde(default)]
    burn_in: usize,
    #[serde(default = "one")]
    thin: usize,
    init: Option<RawInit>,
    #[serde(default)]
    start: StartPolicy,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    precision: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistance {
    kind: String,
    delta: f64,
    lambda: f64,
    lambda0: f64,
    f: RawMixture,
    f0: RawMixture,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContract {
    cells: Vec<(usize, f64)>,
    replications: usize,
    iterations: usize,
    #[serde(default)]
    burn_in: usize,
    #[serde(default = "one")]
    thin: usize,
    #[serde(default = "default_radius")]
    radius: f64,
    #[serde(default = "default_log_exponent")]
    log_exponent: f64,
}

fn default_radius() -> f64 {
    1.0
}

fn default_log_exponent() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum RawDensity {
    PlugIn,
    Predictive,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnose {
    trace: Option<PathBuf>,
    burn_in: Option<usize>,
    thin: Option<usize>,
    max_lag: Option<usize>,
    grid: Option<(f64, f64, usize)>,
    density: Option<RawDensity>,
    #[serde(default)]
    relabel: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub path: Option<PathBuf>,
    pub format: DataFormat,
    pub zero_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: InitPolicy,
    pub start: StartPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceConfig {
    pub kind: DivergenceKind,
    pub delta: f64,
    pub lambda: f64,
    pub f: MixtureDensity,
    pub lambda0: f64,
    pub f0: MixtureDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseConfig {
    pub trace: Option<PathBuf>,
    /// Defaults to the MCMC burn-in.
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub max_lag: usize,
    /// `(from, to, points)`.
    pub grid: (f64, f64, usize),
    pub density: DensityEstimate,
    pub relabel: bool,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            trace: None,
            burn_in: None,
            thin: 1,
            max_lag: 50,
            grid: (-5.0, 5.0, 501),
            density: DensityEstimate::PlugIn,
            relabel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractSection {
    pub cells: Vec<(usize, f64)>,
    pub replications: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub radius: f64,
    pub log_exponent: f64,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub components: Option<usize>,
    /// Full `(ψ, μ, τ)` from `[model]`, when given.
    pub model: Option<ModelParams>,
    pub data: Option<DataConfig>,
    pub prior: Option<Hyperparameters>,
    pub mcmc: Option<McmcConfig>,
    pub distance: Option<DistanceConfig>,
    pub contract: Option<ContractSection>,
    pub diagnose: DiagnoseConfig,
    pub output: Option<PathBuf>,
}

fn config_err(key: &str, message: impl fmt::Display) -> Error {
    Error::Config(format!("{key}: {message}"))
}

fn positive(key: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(config_err(key, format!("must be positive, got {value}")))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    /// Parses `text`; `origin` names the source in diagnostics and anchors
    /// relative paths.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.display().to_string(),
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let base = origin.parent().unwrap_or(Path::new(""));
        Self::from_raw(raw, base)
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Self> {
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };

        let (components, model) = match raw.model {
            None => (None, None),
            Some(m) => {
                let model = match (m.psi, m.mu, m.tau) {
                    (Some(psi), Some(mu), Some(tau)) => {
                        Some(ModelParams::new(psi, mu, tau).map_err(|e| config_err("model", e))?)
                    }
                    (None, None, None) => None,
                    _ => return Err(config_err("model", "psi, mu and tau must be given together")),
                };
                let components = match (m.components, &model) {
                    (Some(j), Some(p)) if j != p.components() => {
                        return Err(config_err(
                            "model.components",
                            format!("is {j} but psi has {} entries", p.components()),
                        ))
                    }
                    (Some(0), _) => return Err(config_err("model.components", "must be at least 1")),
                    (Some(j), _) => Some(j),
                    (None, Some(p)) => Some(p.components()),
                    (None, None) => None,
                };
                (components, model)
            }
        };

        let data = raw
            .data
            .map(|d| -> Result<DataConfig> {
                if d.n == Some(0) {
                    return Err(config_err("data.n", "must be at least 1"));
                }
                if let Some(delta) = d.delta {
                    positive("data.delta", delta)?;
                }
                if !(d.zero_threshold >= 0.0) {
                    return Err(config_err("data.zero_threshold", "must be nonnegative"));
                }
                Ok(DataConfig {
                    n: d.n,
                    delta: d.delta,
                    path: d.path.map(resolve),
                    format: d.format,
                    zero_threshold: d.zero_threshold,
                })
            })
            .transpose()?;

        let prior = match raw.prior {
            None => components.map(Hyperparameters::unit),
            Some(p) => {
                let xi = match (p.xi, components) {
                    (Some(xi), Some(j)) if xi.len() != j => {
                        return Err(config_err("prior.xi", format!("needs {j} entries, got {}", xi.len())))
                    }
                    (Some(xi), _) => xi,
                    (None, Some(j)) => vec![0.0; j],
                    (None, None) => return Err(config_err("prior.xi", "needed when [model] is absent")),
                };
                let h = Hyperparameters {
                    alpha0: positive("prior.alpha0", p.alpha0.unwrap_or(1.0))?,
                    beta0: positive("prior.beta0", p.beta0.unwrap_or(1.0))?,
                    alpha1: positive("prior.alpha1", p.alpha1.unwrap_or(1.0))?,
                    beta1: positive("prior.beta1", p.beta1.unwrap_or(1.0))?,
                    xi,
                    kappa: positive("prior.kappa", p.kappa.unwrap_or(1.0))?,
                };
                h.validate().map_err(|e| config_err("prior", e))?;
                Some(h)
            }
        };
        let components = components.or(prior.as_ref().map(Hyperparameters::components));

        let mcmc = raw
            .mcmc
            .map(|m| -> Result<McmcConfig> {
                if m.iterations == 0 {
                    return Err(config_err("mcmc.iterations", "must be at least 1"));
                }
                if m.thin == 0 {
                    return Err(config_err("mcmc.thin", "must be at least 1"));
                }
                if m.burn_in >= m.iterations {
                    return Err(config_err("mcmc.burn_in", "must be smaller than mcmc.iterations"));
                }
                Ok(McmcConfig {
                    iterations: m.iterations,
                    burn_in: m.burn_in,
                    thin: m.thin,
                    init: match m.init {
                        None | Some(RawInit::PriorConditioned) => InitPolicy::PriorConditioned,
                        Some(RawInit::SingleNearestMean) => InitPolicy::SingleNearestMean,
                    },
                    start: m.start,
                })
            })
            .transpose()?;

        let distance = raw
            .distance
            .map(|d| -> Result<DistanceConfig> {
                let mixture = |key: &str, m: RawMixture| {
                    MixtureDensity::new(m.weights, m.means, m.precision).map_err(|e| config_err(key, e))
                };
                Ok(DistanceConfig {
                    kind: d.kind.parse().map_err(|e| config_err("distance.kind", e))?,
                    delta: positive("distance.delta", d.delta)?,
                    lambda: positive("distance.lambda", d.lambda)?,
                    lambda0: positive("distance.lambda0", d.lambda0)?,
                    f: mixture("distance.f", d.f)?,
                    f0: mixture("distance.f0", d.f0)?,
                })
            })
            .transpose()?;

        let contract = raw
            .contract
            .map(|c| -> Result<ContractSection> {
                if c.cells.is_empty() {
                    return Err(config_err("contract.cells", "needs at least one cell"));
                }
                if c.replications == 0 || c.iterations == 0 || c.thin == 0 {
                    return Err(config_err("contract", "replications, iterations and thin must be at least 1"));
                }
                if c.burn_in >= c.iterations {
                    return Err(config_err("contract.burn_in", "must be smaller than contract.iterations"));
                }
                Ok(ContractSection {
                    cells: c.cells,
                    replications: c.replications,
                    iterations: c.iterations,
                    burn_in: c.burn_in,
                    thin: c.thin,
                    radius: positive("contract.radius", c.radius)?,
                    log_exponent: c.log_exponent,
                })
            })
            .transpose()?;

        let diagnose = match raw.diagnose {
            None => DiagnoseConfig::default(),
            Some(d) => {
                let defaults = DiagnoseConfig::default();
                let grid = d.grid.unwrap_or(defaults.grid);
                if !(grid.0 < grid.1) || grid.2 < 2 {
                    return Err(config_err("diagnose.grid", "needs from < to and at least 2 points"));
                }
                if d.thin == Some(0) {
                    return Err(config_err("diagnose.thin", "must be at least 1"));
                }
                DiagnoseConfig {
                    trace: d.trace.map(resolve),
                    burn_in: d.burn_in,
                    thin: d.thin.unwrap_or(1),
                    max_lag: d.max_lag.unwrap_or(defaults.max_lag),
                    grid,
                    density: match d.density {
                        None | Some(RawDensity::PlugIn) => DensityEstimate::PlugIn,
                        Some(RawDensity::Predictive) => DensityEstimate::Predictive,
                    },
                    relabel: d.relabel,
                }
            }
        };

        Ok(Self {
            mode: raw.mode,
            seed: raw.seed,
            components,
            model,
            data,
            prior,
            mcmc,
            distance,
            contract,
            diagnose,
            output: raw.output.map(|o| resolve(o.dir)),
        })
    }

    /// Checks that everything `mode` needs is present.
    pub fn require(&self, mode: Mode) -> Result<()> {
        if let Some(declared) = self.mode {
            if declared != mode {
                return Err(config_err("mode", format!("file declares `{declared}`, command is `{mode}`")));
            }
        }
        let data = || self.data.as_ref().ok_or_else(|| config_err("data", "section is required"));
        let simulated = |d: &DataConfig| -> Result<()> {
            self.model.as_ref().ok_or_else(|| config_err("model", "psi, mu and tau are required"))?;
            d.n.ok_or_else(|| config_err("data.n", "is required"))?;
            d.delta.ok_or_else(|| config_err("data.delta", "is required"))?;
            Ok(())
        };
        match mode {
            Mode::Simulate => simulated(data()?),
            Mode::Fit => {
                let d = data()?;
                if d.path.is_none() {
                    simulated(d)?;
                }
                self.components.ok_or_else(|| config_err("model.components", "is required"))?;
                let m = self.mcmc.as_ref().ok_or_else(|| config_err("mcmc", "section is required"))?;
                if m.start == StartPolicy::Model && self.model.is_none() {
                    return Err(config_err("mcmc.start", "`model` needs psi, mu and tau in [model]"));
                }
                Ok(())
            }
            Mode::Diagnose => {
                self.diagnose
                    .trace
                    .as_ref()
                    .ok_or_else(|| config_err("diagnose.trace", "is required"))?;
                Ok(())
            }
            Mode::Distance => {
                self.distance.as_ref().ok_or_else(|| config_err("distance", "section is required"))?;
                Ok(())
            }
            Mode::Contract => {
                self.model.as_ref().ok_or_else(|| config_err("model", "psi, mu and tau are required"))?;
                self.contract.as_ref().ok_or_else(|| config_err("contract", "section is required"))?;
                Ok(())
            }
        }
    }

    pub fn hyperparameters(&self) -> Result<Hyperparameters> {
        self.prior
            .clone()
            .or_else(|| self.components.map(Hyperparameters::unit))
            .ok_or_else(|| config_err("prior", "cannot infer the number of components"))
    }

    pub fn contraction(&self) -> Result<ContractionConfig> {
        let c = self.contract.as_ref().ok_or_else(|| config_err("contract", "section is required"))?;
        let truth = self.model.clone().ok_or_else(|| config_err("model", "psi, mu and tau are required"))?;
        Ok(ContractionConfig {
            cells: c.cells.clone(),
            replications: c.replications,
            hyper: self.hyperparameters()?,
            truth,
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            seed: self.seed,
            radius: c.radius,
            log_exponent: c.log_exponent,
        })
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("/cfg/run.toml"))
    }

    #[test]
    fn minimal_simulate_config_gets_defaults() {
        let c = parse(
            "seed = 3\n[model]\npsi = [1.0]\nmu = [0.0]\ntau = 1.0\n[data]\nn = 10\ndelta = 0.5\n",
        )
        .unwrap();
        c.require(Mode::Simulate).unwrap();
        let d = c.data.unwrap();
        assert_eq!(d.format, DataFormat::IncrementCsv);
        assert_eq!(d.zero_threshold, 0.0);
        assert_eq!(c.prior, Some(Hyperparameters::unit(1)));
        assert_eq!(c.diagnose, DiagnoseConfig::default());
    }

    #[test]
    fn missing_seed_is_named() {
        let e = parse("[data]\nn = 10\n").unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
        assert_eq!(e.category(), "data");
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let e = parse("seed = 1\n\n[mcmc]\niterations = 5\nburnin = 2\n").unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("burnin"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn mode_mismatch_and_missing_sections() {
        let c = parse("seed = 1\nmode = \"fit\"\n").unwrap();
        assert!(c.require(Mode::Simulate).unwrap_err().to_string().contains("mode"));
        let e = c.require(Mode::Fit).unwrap_err();
        assert!(e.to_string().contains("data"));
        assert_eq!(e.category(), "config");
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let c = parse("seed = 1\n[data]\npath = \"z.csv\"\n[output]\ndir = \"out\"\n").unwrap();
        assert_eq!(c.data.unwrap().path.unwrap(), Path::new("/cfg/z.csv"));
        assert_eq!(c.output.unwrap(), Path::new("/cfg/out"));
    }

    #[test]
    fn inconsistent_model_is_rejected() {
        assert!(parse("seed = 1\n[model]\npsi = [1.0]\nmu = [0.0]\n").is_err());
        assert!(parse("seed = 1\n[model]\ncomponents = 2\npsi = [1.0]\nmu = [0.0]\ntau = 1.0\n").is_err());
        assert!(parse("seed = 1\n[model]\ncomponents = 2\n[prior]\nxi = [0.0]\n").is_err());
        assert!(parse("seed = 1\n[mcmc]\niterations = 5\nburn_in = 5\n").is_err());
    }
}
