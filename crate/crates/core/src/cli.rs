//! The `decompound` command line tool.
//!
//! Every subcommand reads a configuration file (see [`crate::config`]) and,
//! except for `distance`, writes its artifacts into a fresh output directory
//! given by `--out` or `[output] dir`. Failures print
//! `error[<category>]: <message>` on stderr and exit with status 1; usage
//! errors exit with status 2.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, DataFormat, Mode, RunConfig, StartPolicy};
use crate::diagnostics::{
    autocorrelation, contraction_experiment, posterior_mean_density, posterior_summary, relabel_by_location,
    PosteriorSummary,
};
use crate::distances::{increment_divergence, limit_divergence};
use crate::io::{
    create_run_dir, data_digest, fmt_f64, load_observations, read_trace, write_acf, write_contraction,
    write_curves, write_metadata, write_observations, write_summary, write_trace, METADATA_FILE,
};
use crate::model::{IncrementLaw, ModelParams};
use crate::sampler::{initial_params, run_chain, ChainConfig, Hyperparameters, InitPolicy, Trace};
use crate::simulate::{simulate_increments, ObservationSet};
use crate::{AuxiliaryState, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "decompound", version, about = "Bayesian decompounding of compound Poisson processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate increments and latent jump counts from `[model]`.
    Simulate(RunArgs),
    /// Run the sampler on a data file or on data simulated from `[model]`.
    Fit(RunArgs),
    /// Summarise an existing trace.
    Diagnose(RunArgs),
    /// Print increment-level and limiting divergences.
    Distance(RunArgs),
    /// Run the contraction-rate probe.
    Contract(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; must not exist yet.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Fit(a) => (Mode::Fit, a),
        Command::Diagnose(a) => (Mode::Diagnose, a),
        Command::Distance(a) => (Mode::Distance, a),
        Command::Contract(a) => (Mode::Contract, a),
    };
    match execute(mode, &args, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.category());
            1
        }
    }
}

fn execute(mode: Mode, args: &RunArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut config = parse_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.require(mode)?;
    let out = args.out.clone().or_else(|| config.output.clone());
    match mode {
        Mode::Simulate => simulate(&config, &args.config, &output_dir(out)?, stdout),
        Mode::Fit => fit(&config, &args.config, &output_dir(out)?, stdout),
        Mode::Diagnose => diagnose(&config, &args.config, &output_dir(out)?, stdout),
        Mode::Distance => distance(&config, out.as_deref(), stdout),
        Mode::Contract => contract(&config, &args.config, &output_dir(out)?, stdout),
    }
}

fn output_dir(out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.ok_or_else(|| Error::Config("output: pass --out or set [output] dir".into()))?;
    create_run_dir(&dir)?;
    Ok(dir)
}

struct Metadata(Vec<(String, String)>);

impl Metadata {
    fn new(mode: Mode, config: &RunConfig, config_path: &Path) -> Self {
        let mut m = Metadata(Vec::new());
        m.push("program", format!("decompound {}", env!("CARGO_PKG_VERSION")));
        m.push("mode", mode.name());
        m.push("config", config_path.display());
        m.push("seed", config.seed);
        m
    }

    fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn floats(&mut self, key: &str, values: &[f64]) {
        self.push(key, values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";"));
    }

    fn params(&mut self, prefix: &str, p: &ModelParams) {
        self.floats(&format!("{prefix}_psi"), p.psi());
        self.floats(&format!("{prefix}_mu"), p.mu());
        self.push(&format!("{prefix}_tau"), fmt_f64(p.tau()));
    }

    fn hyper(&mut self, h: &Hyperparameters) {
        self.push("alpha0", fmt_f64(h.alpha0));
        self.push("beta0", fmt_f64(h.beta0));
        self.push("alpha1", fmt_f64(h.alpha1));
        self.push("beta1", fmt_f64(h.beta1));
        self.floats("xi", &h.xi);
        self.push("kappa", fmt_f64(h.kappa));
    }

    fn data(&mut self, data: &ObservationSet) {
        self.push("n", data.len());
        self.push("nonzero", data.nonzero().len());
        self.push("total_time", fmt_f64(data.total_time()));
        self.push("data_sha256", data_digest(data));
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_metadata(&dir.join(METADATA_FILE), &self.0)
    }
}

fn simulated_data(config: &RunConfig) -> Result<(ObservationSet, AuxiliaryState, ModelParams)> {
    let truth = config.model.clone().ok_or_else(|| Error::Config("model: required".into()))?;
    let d = config.data.as_ref().ok_or_else(|| Error::Config("data: required".into()))?;
    let (n, delta) = (
        d.n.ok_or_else(|| Error::Config("data.n: required".into()))?,
        d.delta.ok_or_else(|| Error::Config("data.delta: required".into()))?,
    );
    let (data, aux) = simulate_increments(&truth, &vec![delta; n], config.seed)?;
    Ok((data, aux, truth))
}

fn write_counts(path: &Path, aux: &AuxiliaryState) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = std::iter::once("segment".to_string())
        .chain((1..=aux.components()).map(|j| format!("n_{j}")))
        .collect();
    w.write_record(&header)?;
    for (i, counts) in aux.rows() {
        let row: Vec<String> = std::iter::once(i.to_string())
            .chain(counts.iter().map(|c| c.to_string()))
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(config: &RunConfig, config_path: &Path, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let (data, aux, truth) = simulated_data(config)?;
    write_observations(&dir.join("increments.csv"), &data, DataFormat::IncrementCsv)?;
    write_observations(&dir.join("path.csv"), &data, DataFormat::PathCsv)?;
    write_counts(&dir.join("counts.csv"), &aux)?;
    let mut meta = Metadata::new(Mode::Simulate, config, config_path);
    meta.params("truth", &truth);
    meta.data(&data);
    meta.write(dir)?;
    writeln!(
        stdout,
        "simulated {} increments ({} nonzero) into {}",
        data.len(),
        data.nonzero().len(),
        dir.display()
    )?;
    Ok(())
}

fn grid(range: (f64, f64, usize)) -> Vec<f64> {
    let (a, b, n) = range;
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Writes `summary.csv`, `acf.csv` and `density.csv` for a trace.
fn write_diagnostics(
    config: &RunConfig,
    trace: &Trace,
    burn_in: usize,
    truth: Option<&ModelParams>,
    dir: &Path,
) -> Result<PosteriorSummary> {
    let d = &config.diagnose;
    let trace = if d.relabel { relabel_by_location(trace) } else { trace.clone() };
    let summary = posterior_summary(&trace, burn_in, d.thin)?;
    write_summary(&dir.join("summary.csv"), &summary)?;

    let retained = crate::diagnostics::retained_rows(&trace, burn_in, d.thin)?;
    let max_lag = d.max_lag.min(retained.len().saturating_sub(1));
    let mut acf = Vec::new();
    for param in trace.params() {
        let series: Vec<f64> = retained.iter().map(|r| param.get(r)).collect();
        // Constant columns have no autocorrelation function.
        if let Ok(values) = autocorrelation(&series, max_lag) {
            acf.push((param.name(), values));
        }
    }
    write_acf(&dir.join("acf.csv"), &acf)?;

    let xs = grid(d.grid);
    let estimate = posterior_mean_density(&trace, burn_in, d.thin, &xs, d.density)?;
    let true_curve: Option<Vec<f64>> = truth.map(|t| {
        let f = t.jump_density();
        xs.iter().map(|&x| f.pdf(x)).collect()
    });
    let mut curves: Vec<(&str, &[f64])> = vec![("posterior_mean", &estimate)];
    if let Some(c) = &true_curve {
        curves.push(("truth", c));
    }
    write_curves(&dir.join("density.csv"), &xs, &curves)?;
    Ok(summary)
}

fn print_summary(stdout: &mut dyn Write, summary: &PosteriorSummary) -> Result<()> {
    writeln!(stdout, "retained={}", summary.retained)?;
    if let Some(a) = summary.acceptance_rate {
        writeln!(stdout, "acceptance_rate={}", fmt_f64(a))?;
    }
    for p in &summary.parameters {
        writeln!(
            stdout,
            "{}: mean={} sd={} q025={} q50={} q975={} ess={:.1}",
            p.name,
            fmt_f64(p.mean),
            fmt_f64(p.sd),
            fmt_f64(p.q025),
            fmt_f64(p.q50),
            fmt_f64(p.q975),
            p.ess
        )?;
    }
    Ok(())
}

fn fit(config: &RunConfig, config_path: &Path, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let d = config.data.as_ref().ok_or_else(|| Error::Config("data: required".into()))?;
    let (data, source) = match &d.path {
        Some(path) => (load_observations(path, d.format, d.zero_threshold)?, path.display().to_string()),
        None => (simulated_data(config)?.0, "simulated".to_string()),
    };
    let hyper = config.hyperparameters()?;
    let mcmc = config.mcmc.as_ref().ok_or_else(|| Error::Config("mcmc: required".into()))?;
    let initial = match mcmc.start {
        StartPolicy::Data => initial_params(&data, hyper.components())?,
        StartPolicy::Model => config.model.clone().ok_or_else(|| Error::Config("model: required".into()))?,
    };
    let chain = ChainConfig {
        iterations: mcmc.iterations,
        burn_in: mcmc.burn_in,
        thin: mcmc.thin,
        seed: config.seed,
        init: mcmc.init,
    };
    let output = run_chain(&data, &hyper, initial.clone(), &chain)?;
    write_observations(&dir.join("increments.csv"), &data, DataFormat::IncrementCsv)?;
    write_trace(&dir.join("trace.csv"), &output.trace)?;
    let burn_in = config.diagnose.burn_in.unwrap_or(mcmc.burn_in);
    let summary = write_diagnostics(config, &output.trace, burn_in, config.model.as_ref(), dir)?;

    let mut meta = Metadata::new(Mode::Fit, config, config_path);
    meta.push("data_source", source);
    meta.data(&data);
    meta.hyper(&hyper);
    meta.push("components", hyper.components());
    meta.push("iterations", mcmc.iterations);
    meta.push("burn_in", mcmc.burn_in);
    meta.push("thin", mcmc.thin);
    meta.push(
        "init",
        match mcmc.init {
            InitPolicy::PriorConditioned => "prior_conditioned",
            InitPolicy::SingleNearestMean => "single_nearest_mean",
        },
    );
    meta.params("initial", &initial);
    if let Some(t) = &config.model {
        meta.params("truth", t);
    }
    if let Some(a) = output.trace.acceptance_rate {
        meta.push("acceptance_rate", fmt_f64(a));
    }
    if let Some(a) = output.trace.acceptance_rate_overall {
        meta.push("acceptance_rate_overall", fmt_f64(a));
    }
    meta.write(dir)?;
    print_summary(stdout, &summary)
}

fn diagnose(config: &RunConfig, config_path: &Path, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let path = config
        .diagnose
        .trace
        .as_ref()
        .ok_or_else(|| Error::Config("diagnose.trace: required".into()))?;
    let trace = read_trace(path)?;
    let burn_in = config
        .diagnose
        .burn_in
        .or(config.mcmc.as_ref().map(|m| m.burn_in))
        .unwrap_or(trace.burn_in);
    let summary = write_diagnostics(config, &trace, burn_in, config.model.as_ref(), dir)?;
    let mut meta = Metadata::new(Mode::Diagnose, config, config_path);
    meta.push("trace", path.display());
    meta.push("burn_in", burn_in);
    meta.push("thin", config.diagnose.thin);
    meta.write(dir)?;
    print_summary(stdout, &summary)
}

fn distance(config: &RunConfig, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let d = config.distance.as_ref().ok_or_else(|| Error::Config("distance: required".into()))?;
    let law = IncrementLaw::new(ModelParams::from_density(d.lambda, &d.f)?, d.delta)?;
    let law0 = IncrementLaw::new(ModelParams::from_density(d.lambda0, &d.f0)?, d.delta)?;
    let inc = increment_divergence(d.kind, &law, &law0)?;
    let limit = limit_divergence(d.kind, d.lambda, &d.f, d.lambda0, &d.f0)?;
    let lines = [
        ("kind", d.kind.name().to_string()),
        ("delta", fmt_f64(d.delta)),
        ("raw", fmt_f64(inc.raw)),
        ("scaled", fmt_f64(inc.scaled)),
        ("limit", fmt_f64(limit.value)),
        ("quadrature_error", fmt_f64(inc.quad_error.max(limit.quad_error))),
    ];
    for (k, v) in &lines {
        writeln!(stdout, "{k}={v}")?;
    }
    if let Some(dir) = out {
        create_run_dir(dir)?;
        let entries: Vec<(String, String)> = lines.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        write_metadata(&dir.join("distance.txt"), &entries)?;
    }
    Ok(())
}

fn contract(config: &RunConfig, config_path: &Path, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let experiment = config.contraction()?;
    let report = contraction_experiment(&experiment)?;
    write_contraction(&dir.join("contraction.csv"), &report)?;
    let mut meta = Metadata::new(Mode::Contract, config, config_path);
    meta.params("truth", &experiment.truth);
    meta.hyper(&experiment.hyper);
    meta.push("replications", experiment.replications);
    meta.push("iterations", experiment.iterations);
    meta.push("burn_in", experiment.burn_in);
    match report.slope {
        Some(fit) => {
            meta.push("slope", fmt_f64(fit.slope));
            meta.push("slope_std_error", fmt_f64(fit.std_error));
        }
        None => meta.push("slope", "undefined"),
    }
    meta.push("failures", report.failures.len());
    meta.write(dir)?;
    for row in &report.rows {
        writeln!(
            stdout,
            "n_delta={} mean_distance={} mass_outside={}",
            fmt_f64(row.n_delta),
            fmt_f64(row.mean_distance),
            fmt_f64(row.mass_outside)
        )?;
    }
    for f in &report.failures {
        writeln!(stdout, "failed n={} delta={} replication={}: {}", f.n, f.delta, f.replication, f.message)?;
    }
    match report.slope {
        Some(fit) => writeln!(stdout, "slope={} std_error={}", fmt_f64(fit.slope), fmt_f64(fit.std_error))?,
        None => writeln!(stdout, "slope=undefined")?,
    }
    Ok(())
}
