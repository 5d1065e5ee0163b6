use std::fs;
use std::path::{Path, PathBuf};

use decompound::cli::run_cli;
use decompound::config::parse_config;
use decompound::io::{load_observations, read_metadata, read_trace};
use decompound::config::DataFormat;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("decompound").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const MODEL: &str = r#"
seed = 5

[model]
psi = [0.8, 0.2]
mu = [2.0, -1.0]
tau = 1.0

[data]
n = 300
delta = 1.0

[mcmc]
iterations = 400
burn_in = 100
thin = 2

[diagnose]
max_lag = 10
grid = [-4.0, 5.0, 91]
"#;

#[test]
fn simulate_fit_diagnose_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let config = write(root, "run.toml", MODEL);
    let cfg = config.to_str().unwrap();

    let sim = root.join("sim");
    let (code, _, err) = run(&["simulate", "--config", cfg, "--out", sim.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    for f in ["increments.csv", "path.csv", "counts.csv", "metadata.txt"] {
        assert!(sim.join(f).exists(), "missing {f}");
    }

    let fit = root.join("fit");
    let (code, stdout, err) = run(&["fit", "--config", cfg, "--out", fit.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    for f in ["increments.csv", "trace.csv", "summary.csv", "acf.csv", "density.csv", "metadata.txt"] {
        assert!(fit.join(f).exists(), "missing {f}");
    }
    assert!(stdout.contains("retained=150"), "{stdout}");
    assert!(stdout.contains("psi_1: mean="));
    let trace = read_trace(&fit.join("trace.csv")).unwrap();
    assert_eq!(trace.len(), 200);
    assert_eq!(trace.thin, 2);
    let meta = read_metadata(&fit.join("metadata.txt")).unwrap();
    assert!(meta.iter().any(|(k, _)| k == "data_sha256"));
    assert!(meta.iter().any(|(k, _)| k == "acceptance_rate"));

    // The simulated data file and the data fitted in memory are the same.
    let from_sim = load_observations(&sim.join("increments.csv"), DataFormat::IncrementCsv, 0.0).unwrap();
    let from_fit = load_observations(&fit.join("increments.csv"), DataFormat::IncrementCsv, 0.0).unwrap();
    assert_eq!(from_sim.increments(), from_fit.increments());
    let from_path = load_observations(&sim.join("path.csv"), DataFormat::PathCsv, 0.0).unwrap();
    for (a, b) in from_path.increments().iter().zip(from_sim.increments()) {
        assert!((a - b).abs() < 1e-9);
    }

    // Fitting the written file reproduces the in-memory trace exactly.
    let from_file = MODEL.replace("n = 300\ndelta = 1.0", "path = \"sim/increments.csv\"");
    let config2 = write(root, "file.toml", &from_file);
    let refit = root.join("refit");
    let (code, _, err) = run(&["fit", "--config", config2.to_str().unwrap(), "--out", refit.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read(fit.join("trace.csv")).unwrap(), fs::read(refit.join("trace.csv")).unwrap());

    let diag_cfg = write(root, "diag.toml", "seed = 5\n[diagnose]\ntrace = \"fit/trace.csv\"\nburn_in = 100\nmax_lag = 10\n");
    let diag = root.join("diag");
    let (code, stdout, err) = run(&["diagnose", "--config", diag_cfg.to_str().unwrap(), "--out", diag.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    for f in ["summary.csv", "acf.csv", "density.csv", "metadata.txt"] {
        assert!(diag.join(f).exists(), "missing {f}");
    }
    assert!(stdout.contains("retained=150"));
    assert_eq!(fs::read(fit.join("summary.csv")).unwrap(), fs::read(diag.join("summary.csv")).unwrap());
}

#[test]
fn repeated_fits_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "run.toml", MODEL);
    let cfg = config.to_str().unwrap();
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        assert_eq!(run(&["fit", "--config", cfg, "--out", dir.to_str().unwrap()]).0, 0);
        traces.push(fs::read(dir.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let other = tmp.path().join("c");
    assert_eq!(run(&["fit", "--config", cfg, "--out", other.to_str().unwrap(), "--seed", "6"]).0, 0);
    assert_ne!(traces[0], fs::read(other.join("trace.csv")).unwrap());
}

#[test]
fn distance_prints_the_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "d.toml",
        r#"
seed = 1
[distance]
kind = "hellinger_sq"
delta = 0.01
lambda = 1.2
lambda0 = 1.0
f = { weights = [1.0], means = [0.0], precision = 1.0 }
f0 = { weights = [1.0], means = [0.0], precision = 1.0 }
"#,
    );
    let (code, stdout, err) = run(&["distance", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let value = |key: &str| -> f64 {
        stdout
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value("limit") - (1.2f64.sqrt() - 1.0).powi(2)).abs() < 1e-10);
    assert!((value("scaled") / value("limit") - 1.0).abs() < 0.1);
}

#[test]
fn errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["frobnicate"]);
    assert_ne!(code, 0);

    let missing_seed = write(tmp.path(), "noseed.toml", "[data]\nn = 3\ndelta = 1.0\n");
    let (code, _, err) = run(&["simulate", "--config", missing_seed.to_str().unwrap(), "--out", "x"]);
    assert_eq!(code, 1);
    assert!(err.contains("seed"), "{err}");

    let unknown = write(tmp.path(), "unknown.toml", "seed = 1\n\n[data]\nn = 3\nbogus = 2\n");
    let (code, _, err) = run(&["simulate", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("bogus") && err.contains("line 5"), "{err}");

    let config = write(tmp.path(), "run.toml", MODEL);
    let existing = tmp.path().join("exists");
    fs::create_dir(&existing).unwrap();
    let (code, _, err) = run(&["simulate", "--config", config.to_str().unwrap(), "--out", existing.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error["), "{err}");
}

#[test]
fn shipped_experiment_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/experiment1.toml");
    let config = parse_config(&path).unwrap();
    let model = config.model.unwrap();
    assert_eq!(model.psi(), &[0.8, 0.2]);
    assert_eq!(model.mu(), &[2.0, -1.0]);
    assert_eq!(model.tau(), 1.0);
    let data = config.data.unwrap();
    assert_eq!((data.n, data.delta), (Some(5000), Some(1.0)));
    let hyper = config.prior.unwrap();
    assert_eq!((hyper.alpha0, hyper.beta0, hyper.alpha1, hyper.beta1, hyper.kappa), (1.0, 1.0, 1.0, 1.0, 1.0));
    assert_eq!(hyper.xi, vec![0.0, 0.0]);
    let mcmc = config.mcmc.unwrap();
    assert_eq!((mcmc.iterations, mcmc.burn_in, mcmc.thin), (15000, 5000, 5));
}
