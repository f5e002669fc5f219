//! `transframe`: build translate systems, certify their bounds and write
//! CSV certificates plus a reproducibility manifest.
//!
//! Exit status: 0 when every judged row passes, 1 when a check fails (or a
//! computation does not converge), 2 on configuration errors.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use transframe::certificate::Certificate;

use commands::{Outcome, RestrictionMode};
use config::Config;

#[derive(Parser)]
#[command(name = "transframe", version, about = "Frames and decompositions of translates in L_p(R)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "TRANSFRAME_OUT", default_value = "transframe-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a frame of translates and check its norm identity and index conditions.
    Construct(Common),
    /// Evaluate the analytic bound on ‖S − Id‖ for a schedule.
    Certify(Common),
    /// Operator-error oracle, Neumann reconstruction and unconditional tails.
    Reconstruct(Common),
    /// Build the decomposition into blocks of translates and certify its identities.
    Fdd(Common),
    /// Restriction-operator diagnostics.
    Restriction {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "diagnostic")]
        mode: RestrictionMode,
    },
    /// Empirical ℓ_p-equivalence and unconditionality constants of a Haar cell.
    Probe(Common),
    /// Aggregate the certificates under a directory into report.csv.
    Report {
        /// Directory holding run directories (or a single run).
        dir: PathBuf,
    },
}

enum Failure {
    Config(anyhow::Error),
    Check(anyhow::Error),
}

fn classify(e: anyhow::Error) -> Failure {
    use transframe::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::NoConvergence { .. } | E::NotInSpan { .. }) => Failure::Check(e),
        _ => Failure::Config(e),
    }
}

fn write_run(name: &str, common: &Common, settings: &Config, outcome: &Outcome, seconds: f64) -> Result<()> {
    let out = &common.out;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    output::write_certificate(&out.join(output::CERTIFICATE), &outcome.cert)?;
    let mut names = vec![output::CERTIFICATE.to_string()];
    for (file, contents) in &outcome.artifacts {
        std::fs::write(out.join(file), contents).with_context(|| format!("writing {file}"))?;
        names.push(file.clone());
    }
    let info = output::RunInfo {
        subcommand: name,
        config_path: common.config.as_deref(),
        out,
        settings,
        seconds,
    };
    output::write_manifest(&info, &outcome.cert, &names)
}

fn run_command(name: &str, common: &Common, f: impl FnOnce(&mut Config) -> Result<Outcome>) -> ExitCode {
    let mut settings = match Config::load(common.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return report_error(Failure::Config(e)),
    };
    if common.seed.is_some() {
        settings.seed = common.seed;
    }
    if common.trials.is_some() {
        settings.trials = common.trials;
    }
    if common.tol.is_some() {
        settings.tol = common.tol;
    }
    let started = Instant::now();
    let outcome = match f(&mut settings) {
        Ok(o) => o,
        Err(e) => {
            let failure = classify(e);
            if let Failure::Check(err) = &failure {
                let mut cert = Certificate::new();
                cert.check("computation_failed", 1.0, 0.0, false);
                let failed = Outcome { cert, artifacts: Vec::new() };
                if let Err(w) = write_run(name, common, &settings, &failed, started.elapsed().as_secs_f64()) {
                    eprintln!("error: {w:#}");
                }
                eprintln!("error: {err:#}");
                return ExitCode::from(1);
            }
            return report_error(failure);
        }
    };
    if let Err(e) = write_run(name, common, &settings, &outcome, started.elapsed().as_secs_f64()) {
        return report_error(Failure::Config(e));
    }
    summarize(&outcome.cert, &common.out)
}

fn summarize(cert: &Certificate, out: &Path) -> ExitCode {
    let failed: Vec<_> = cert.rows.iter().filter(|r| r.pass == Some(false)).collect();
    for r in &failed {
        eprintln!(
            "FAIL {},{:.16e},{},false",
            r.quantity,
            r.value,
            r.bound.map(|b| format!("{b:.16e}")).unwrap_or_default()
        );
    }
    println!(
        "{} rows, {} failed; certificate written to {}",
        cert.rows.len(),
        failed.len(),
        out.join(output::CERTIFICATE).display()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn report_error(f: Failure) -> ExitCode {
    match f {
        Failure::Config(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Failure::Check(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Construct(c) => run_command("construct", c, commands::construct),
        Command::Certify(c) => run_command("certify", c, commands::certify),
        Command::Reconstruct(c) => run_command("reconstruct", c, commands::reconstruct),
        Command::Fdd(c) => run_command("fdd", c, commands::fdd),
        Command::Restriction { common, mode } => {
            let mode = *mode;
            run_command("restriction", common, move |cfg| commands::restriction(cfg, mode))
        }
        Command::Probe(c) => run_command("probe", c, commands::probe),
        Command::Report { dir } => match output::aggregate(dir) {
            Ok((rows, failed)) => {
                println!("{rows} rows, {failed} failed; report written to {}", dir.join(output::REPORT).display());
                if failed == 0 {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => report_error(Failure::Config(e)),
        },
    }
}
