use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use transframe::certificate::{CertRow, Certificate};

use crate::config::Config;

pub const CERTIFICATE: &str = "certificate.csv";
pub const MANIFEST: &str = "manifest.toml";
pub const REPORT: &str = "report.csv";

pub const HEADER: [&str; 4] = ["quantity", "value", "bound", "pass"];

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn record(row: &CertRow) -> [String; 4] {
    [
        row.quantity.clone(),
        number(row.value),
        row.bound.map(number).unwrap_or_default(),
        row.pass.map(|b| b.to_string()).unwrap_or_default(),
    ]
}

pub fn write_certificate(path: &Path, cert: &Certificate) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(HEADER)?;
    for row in &cert.rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Run<'a> {
    subcommand: &'a str,
    config: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    tol: Option<f64>,
    out: String,
    version: &'a str,
    wall_clock_seconds: f64,
    passed: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    run: Run<'a>,
    /// The fully resolved settings, reusable as `--config`.
    settings: &'a Config,
    provenance: BTreeMap<String, String>,
    artifacts: Vec<String>,
}

pub struct RunInfo<'a> {
    pub subcommand: &'a str,
    pub config_path: Option<&'a Path>,
    pub out: &'a Path,
    pub settings: &'a Config,
    pub seconds: f64,
}

pub fn write_manifest(info: &RunInfo<'_>, cert: &Certificate, artifacts: &[String]) -> Result<()> {
    let s = info.settings;
    let manifest = Manifest {
        run: Run {
            subcommand: info.subcommand,
            config: info.config_path.map(|p| p.display().to_string()),
            seed: s.seed,
            trials: s.trials,
            tol: s.tol,
            out: info.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
            wall_clock_seconds: info.seconds,
            passed: cert.passed(),
        },
        settings: s,
        provenance: cert.provenance.iter().cloned().collect(),
        artifacts: artifacts.to_vec(),
    };
    let path = info.out.join(MANIFEST);
    fs::write(&path, toml::to_string(&manifest)?).with_context(|| format!("writing {}", path.display()))
}

/// Every `certificate.csv` directly in `dir` or one level below it.
fn certificates_under(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let direct = dir.join(CERTIFICATE);
    if direct.is_file() {
        found.push(direct);
    }
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path().join(CERTIFICATE);
        if path.is_file() {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

/// Concatenates the certificates under `dir` into `dir/report.csv` with a
/// leading `run` column. Returns `(rows, failed rows)`.
pub fn aggregate(dir: &Path) -> Result<(usize, usize)> {
    let sources = certificates_under(dir)?;
    if sources.is_empty() {
        bail!("no {CERTIFICATE} found in {} or its subdirectories", dir.display());
    }
    let out = dir.join(REPORT);
    let mut w = csv::Writer::from_path(&out).with_context(|| format!("creating {}", out.display()))?;
    w.write_record(["run", HEADER[0], HEADER[1], HEADER[2], HEADER[3]])?;
    let (mut rows, mut failed) = (0, 0);
    for src in sources {
        let run = src
            .parent()
            .and_then(|p| p.strip_prefix(dir).ok())
            .map(|p| p.display().to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| ".".into());
        let mut r = csv::Reader::from_path(&src).with_context(|| format!("reading {}", src.display()))?;
        if r.headers()?.iter().ne(HEADER) {
            bail!("{} does not have the columns {}", src.display(), HEADER.join(","));
        }
        for rec in r.records() {
            let rec = rec?;
            if rec.get(3) == Some("false") {
                failed += 1;
            }
            rows += 1;
            w.write_record(std::iter::once(run.as_str()).chain(rec.iter()))?;
        }
    }
    w.flush()?;
    Ok((rows, failed))
}
