use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_transframe"));
    c.env_remove("TRANSFRAME_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["quantity", "value", "bound", "pass"]);
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn certify_default_schedule_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["certify"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = rows(&dir.path().join("certificate.csv"));
    let bound = rows.iter().find(|r| r[0] == "analytic_bound").unwrap();
    assert!(bound[1].parse::<f64>().unwrap() < 0.5);
    assert_eq!(bound[3], "true");
    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("subcommand = \"certify\""));
}

#[test]
fn bounded_sequence_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "p = 3.0\nn = [4]\nsequence = \"list:1,5,9,13\"\n").unwrap();
    let out = run(&["construct", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbounded sequence required"));
}

#[test]
fn unknown_keys_and_bad_exponents_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "colour = 3\n").unwrap();
    assert_eq!(run(&["fdd", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
    fs::write(&cfg, "p = 1.5\n").unwrap();
    assert_eq!(run(&["fdd", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one_with_failure_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "eps = 1e-30\nlevels = 10\n").unwrap();
    let out = run(&["restriction", "--mode", "diagnostic", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(1));
    let rows = rows(&dir.path().join("o/certificate.csv"));
    assert!(rows.iter().any(|r| r[0] == "bound_factor" && r[3] == "false"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL bound_factor"));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for sub in [vec!["probe"], vec!["restriction", "--mode", "haar"], vec!["reconstruct"]] {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        let mut args = sub.clone();
        args.extend(["--seed", "42", "--trials", "50"]);
        assert_eq!(run(&args, &a).status.code(), Some(0));
        assert_eq!(run(&args, &b).status.code(), Some(0));
        assert_eq!(fs::read(a.join("certificate.csv")).unwrap(), fs::read(b.join("certificate.csv")).unwrap());
    }
}

#[test]
fn report_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["certify"], &dir.path().join("one")).status.code(), Some(0));
    assert_eq!(run(&["fdd"], &dir.path().join("two")).status.code(), Some(0));
    let report = |d: &Path| bin().arg("report").arg(d).output().unwrap();
    assert_eq!(report(dir.path()).status.code(), Some(0));
    let first = fs::read(dir.path().join("report.csv")).unwrap();
    assert_eq!(report(dir.path()).status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("report.csv")).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("run,quantity,value,bound,pass\n"));
    assert!(text.contains("\none,analytic_bound,") && text.contains("\ntwo,"));
    assert_eq!(report(&dir.path().join("missing")).status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let out = bin().arg("certify").env("TRANSFRAME_OUT", &target).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("certificate.csv").is_file());
}
