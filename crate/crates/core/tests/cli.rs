use std::path::Path;
use std::process::{Command, Output};

use fragsim::experiments::PeriodFit;
use fragsim::graph::GraphReport;
use fragsim::io::{open, read_evolve, read_json, read_sectors, read_sweep};

fn fragsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRAGSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fragsim(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "summary should be one line: {stdout}");
    stdout
}

#[test]
fn sectors_writes_every_configuration() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sectors", "--n", "5"]);
    let rows = read_sectors(open(&dir.path().join("sectors.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 32);
}

#[test]
fn evolve_with_tracking_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "n_sites = 5\nv = 7.0\ndelta = 3.5\nhorizon = 2.0\ntrack = [\"11000\"]\n",
    )
    .unwrap();
    ok(dir.path(), &["evolve", "--config", "run.toml", "--method", "stepped", "--out", "out/ev.csv"]);
    let table = read_evolve(open(&dir.path().join("out/ev.csv")).unwrap()).unwrap();
    assert_eq!(table.times.len(), 401);
    assert_eq!(table.config_populations.len(), 1);
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{ "v": 3.0, "delta_min": 0.0, "delta_max": 1.0 }"#).unwrap();
    ok(
        dir.path(),
        &["sweep", "--config", "run.json", "--v", "0", "--delta-step", "0.5", "--horizon", "2", "--threads", "2"],
    );
    let rows = read_sweep(open(&dir.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[0].peak_n_r - 1.0).abs() < 1e-3);
}

#[test]
fn periods_then_fit_agree() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["periods", "--k", "2", "--v-min", "6", "--v-max", "9", "--out", "p.csv"]);
    let from_run: PeriodFit = read_json(open(&dir.path().join("p.fit.json")).unwrap()).unwrap();
    ok(dir.path(), &["fit", "--in", "p.csv"]);
    let refit: PeriodFit = read_json(open(&dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(from_run.points.len(), 4);
    assert!((from_run.exponent - refit.exponent).abs() < 1e-12);
}

#[test]
fn graph_report_has_vacuum_component() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["graph", "--n", "5", "--v", "10", "--delta", "5", "--k", "2"]);
    let report: GraphReport = read_json(open(&dir.path().join("graph.json")).unwrap()).unwrap();
    assert_eq!(report.vacuum_component.len(), 6);
}

#[test]
fn secondary_writes_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["secondary", "--horizon", "5", "--out", "sec.csv"]);
    assert!(dir.path().join("sec.csv").exists());
    assert!(dir.path().join("sec.report.json").exists());
}

#[test]
fn weak_control_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = fragsim(dir.path(), &["secondary", "--v", "7", "--v-control", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v_control"));
}

#[test]
fn missing_config_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = fragsim(dir.path(), &["sectors", "--config", "absent.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));
}

#[test]
fn fit_without_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fragsim(dir.path(), &["fit"]).status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fragsim(dir.path(), &["bogus"]).status.code(), Some(2));
}
