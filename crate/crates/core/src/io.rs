//! CSV and sidecar persistence.
//!
//! Every float is written with 17 significant digits so that files
//! round-trip exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::DataFormat;
use crate::diagnostics::{ContractionReport, PosteriorSummary};
use crate::sampler::{Trace, TraceRow};
use crate::simulate::ObservationSet;
use crate::{Error, Result};

/// Name of the key/value metadata file written next to run outputs.
pub const METADATA_FILE: &str = "metadata.txt";

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Creates a fresh output directory; an existing one is never reused.
pub fn create_run_dir(dir: &Path) -> Result<()> {
    if let Some(parent) = dir.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::create_dir(dir).map_err(|e| {
        if e.kind() == io::ErrorKind::AlreadyExists {
            Error::Io(io::Error::new(
                e.kind(),
                format!("output directory {} already exists; refusing to overwrite", dir.display()),
            ))
        } else {
            Error::Io(e)
        }
    })
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn write_observations(path: &Path, data: &ObservationSet, format: DataFormat) -> Result<()> {
    match format {
        DataFormat::IncrementCsv => write_rows(
            path,
            &strings(&["delta", "z"]),
            data.durations()
                .iter()
                .zip(data.increments())
                .map(|(d, z)| vec![fmt_f64(*d), fmt_f64(*z)]),
        ),
        DataFormat::PathCsv => write_rows(
            path,
            &strings(&["t", "x"]),
            data.times()
                .iter()
                .zip(data.cumulative())
                .map(|(t, x)| vec![fmt_f64(*t), fmt_f64(x)]),
        ),
    }
}

/// Reads a numeric CSV with the given header into columns.
fn read_columns(path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let label = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            path: label,
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut columns = vec![Vec::new(); expected.len()];
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k as u64 + 2, |p| p.line()) as usize;
        if record.len() != expected.len() {
            return Err(Error::Parse {
                path: label,
                line,
                message: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        for (column, field) in columns.iter_mut().zip(record.iter()) {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: label.clone(),
                line,
                message: format!("`{field}` is not a number"),
            })?;
            column.push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::Data(format!("{label} has no data rows")));
    }
    Ok(columns)
}

/// Loads observations; `zero_threshold` decides which increments count as
/// zero.
pub fn load_observations(path: &Path, format: DataFormat, zero_threshold: f64) -> Result<ObservationSet> {
    match format {
        DataFormat::IncrementCsv => {
            let mut cols = read_columns(path, &["delta", "z"])?;
            let z = cols.pop().expect("two columns");
            let delta = cols.pop().expect("two columns");
            ObservationSet::new(delta, z, zero_threshold)
        }
        DataFormat::PathCsv => {
            let cols = read_columns(path, &["t", "x"])?;
            let (t, x) = (&cols[0], &cols[1]);
            if t.len() < 2 {
                return Err(Error::Data(format!("{} needs at least two points", path.display())));
            }
            if let Some(k) = t.windows(2).position(|w| !(w[0] < w[1])) {
                return Err(Error::NonMonotone(k + 1));
            }
            let delta = t.windows(2).map(|w| w[1] - w[0]).collect();
            let z = x.windows(2).map(|w| w[1] - w[0]).collect();
            ObservationSet::new(delta, z, zero_threshold)
        }
    }
}

/// SHA-256 of the increment CSV serialisation, in hex.
pub fn data_digest(data: &ObservationSet) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"delta,z\n");
    for (d, z) in data.durations().iter().zip(data.increments()) {
        hasher.update(format!("{},{}\n", fmt_f64(*d), fmt_f64(*z)).as_bytes());
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    write_rows(
        path,
        &trace.header(),
        trace.rows.iter().map(|r| {
            std::iter::once(r.iteration.to_string())
                .chain(r.psi.iter().chain(&r.mu).map(|v| fmt_f64(*v)))
                .chain([fmt_f64(r.tau), fmt_f64(r.lambda)])
                .collect()
        }),
    )
}

/// Reads a trace CSV. Thinning and burn-in are taken from the sidecar
/// metadata in the same directory when present.
pub fn read_trace(path: &Path) -> Result<Trace> {
    let label = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 5 || (header.len() - 3) % 2 != 0 {
        return Err(Error::Parse {
            path: label,
            line: 1,
            message: "not a trace header".into(),
        });
    }
    let j = (header.len() - 3) / 2;
    let mut trace = Trace::new(j, 1, 0);
    if trace.header() != header {
        return Err(Error::Parse {
            path: label,
            line: 1,
            message: format!("expected header `{}`", trace.header().join(",")),
        });
    }
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = k + 2;
        let bad = |message: String| Error::Parse {
            path: label.clone(),
            line,
            message,
        };
        let iteration = record[0]
            .parse::<usize>()
            .map_err(|_| bad(format!("`{}` is not an iteration number", &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("`{f}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        trace.rows.push(TraceRow {
            iteration,
            psi: values[..j].to_vec(),
            mu: values[j..2 * j].to_vec(),
            tau: values[2 * j],
            lambda: values[2 * j + 1],
        });
    }
    if let Some(dir) = path.parent() {
        let meta = dir.join(METADATA_FILE);
        if meta.exists() {
            for (key, value) in read_metadata(&meta)? {
                match key.as_str() {
                    "thin" => trace.thin = value.parse().unwrap_or(1),
                    "burn_in" => trace.burn_in = value.parse().unwrap_or(0),
                    "acceptance_rate" => trace.acceptance_rate = value.parse().ok(),
                    "acceptance_rate_overall" => trace.acceptance_rate_overall = value.parse().ok(),
                    _ => {}
                }
            }
        }
    }
    Ok(trace)
}

pub fn write_metadata(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    for (key, value) in entries {
        writeln!(file, "{key}={value}")?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.split_once('=')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    line: k + 1,
                    message: "expected key=value".into(),
                })
        })
        .collect()
}

pub fn write_summary(path: &Path, summary: &PosteriorSummary) -> Result<()> {
    write_rows(
        path,
        &strings(&["parameter", "mean", "sd", "q025", "q50", "q975", "ess"]),
        summary.parameters.iter().map(|p| {
            vec![
                p.name.clone(),
                fmt_f64(p.mean),
                fmt_f64(p.sd),
                fmt_f64(p.q025),
                fmt_f64(p.q50),
                fmt_f64(p.q975),
                fmt_f64(p.ess),
            ]
        }),
    )
}

/// Columns `x` and one column per named curve.
pub fn write_curves(path: &Path, grid: &[f64], curves: &[(&str, &[f64])]) -> Result<()> {
    let header: Vec<String> = std::iter::once("x".to_string())
        .chain(curves.iter().map(|(n, _)| n.to_string()))
        .collect();
    write_rows(
        path,
        &header,
        grid.iter().enumerate().map(|(k, x)| {
            std::iter::once(fmt_f64(*x))
                .chain(curves.iter().map(|(_, c)| fmt_f64(c[k])))
                .collect()
        }),
    )
}

/// Columns `lag` and one autocorrelation column per parameter.
pub fn write_acf(path: &Path, columns: &[(String, Vec<f64>)]) -> Result<()> {
    let lags = columns.iter().map(|c| c.1.len()).min().unwrap_or(0);
    let header: Vec<String> = std::iter::once("lag".to_string())
        .chain(columns.iter().map(|c| c.0.clone()))
        .collect();
    write_rows(
        path,
        &header,
        (0..lags).map(|k| {
            std::iter::once(k.to_string())
                .chain(columns.iter().map(|c| fmt_f64(c.1[k])))
                .collect()
        }),
    )
}

/// One line per replication: `n,delta,n_delta,replication,distance`.
pub fn write_contraction(path: &Path, report: &ContractionReport) -> Result<()> {
    write_rows(
        path,
        &strings(&["n", "delta", "n_delta", "replication", "distance"]),
        report.rows.iter().flat_map(|r| {
            r.distances.iter().enumerate().map(move |(k, d)| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.delta),
                    fmt_f64(r.n_delta),
                    k.to_string(),
                    fmt_f64(*d),
                ]
            })
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn path_csv_with_three_points() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("path.csv");
        fs::write(&p, "t,x\n0,0\n1,2.5\n2,2.5\n").unwrap();
        let data = load_observations(&p, DataFormat::PathCsv, 0.0).unwrap();
        assert_eq!(data.increments(), &[2.5, 0.0]);
        assert_eq!(data.nonzero(), &[0]);
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "delta,z\n1,0.5\n1,abc\n").unwrap();
        match load_observations(&p, DataFormat::IncrementCsv, 0.0).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        fs::write(&p, "delta,z\n").unwrap();
        assert!(matches!(load_observations(&p, DataFormat::IncrementCsv, 0.0), Err(Error::Data(_))));
        fs::write(&p, "t,x\n0,0\n2,1\n1,3\n").unwrap();
        assert!(matches!(load_observations(&p, DataFormat::PathCsv, 0.0), Err(Error::NonMonotone(2))));
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(load_observations(&p, DataFormat::IncrementCsv, 0.0).is_err());
    }

    #[test]
    fn run_dir_is_never_reused() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested/run");
        create_run_dir(&out).unwrap();
        assert!(create_run_dir(&out).is_err());
    }

    #[test]
    fn metadata_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(METADATA_FILE);
        let entries = vec![("seed".to_string(), "7".to_string()), ("a".into(), "x=y".into())];
        write_metadata(&p, &entries).unwrap();
        assert_eq!(read_metadata(&p).unwrap(), entries);
    }
}
