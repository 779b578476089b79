use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use ggc::config::{Format, ScheduleSection};
use ggc::output::Cell;
use ggc::{execute, parse_config, run};
use ggc_core::portfolio::optimal_portfolio;
use ggc_core::robustness::{make_schedule, run_sweep, SweepOptions};
use ggc_core::sampling::{sample_mixing, NmvmSample};

fn example(stem: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{stem}.toml"));
    fs::read_to_string(path).unwrap()
}

fn real(cell: &Cell) -> f64 {
    match cell {
        Cell::Real(v) => *v,
        other => panic!("expected a real, got {other:?}"),
    }
}

fn ggc(dir: &Path, config: &str, extra: &[&str]) -> (i32, String, String) {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_ggc"))
        .current_dir(dir)
        .arg("--config")
        .arg(&path)
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn entries(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

#[test]
fn optimize_matches_the_core_solution() {
    let config = parse_config(&example("optimize")).unwrap();
    let report = execute(&config).unwrap();
    let expected = optimal_portfolio(&config.nmvm_model().unwrap(), &config.market.unwrap()).unwrap();
    let row = &report.table.rows[0];
    let column = |name: &str| report.table.header.iter().position(|h| h == name).unwrap();
    assert_eq!(real(&row[column("q_min")]), expected.q_min);
    assert_eq!(row[column("regular")], Cell::Flag(expected.regular));
    assert_eq!(real(&row[column("x_1")]), expected.x_star[0]);
    assert_eq!(real(&row[column("x_2")]), expected.x_star[1]);
}

#[test]
fn optimize_csv_round_trips_the_solution() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = ggc(dir.path(), &example("optimize"), &[]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("command=optimize status=ok"), "{stdout}");
    assert_eq!(stdout.lines().count(), 1);
    let config = parse_config(&example("optimize")).unwrap();
    let expected = optimal_portfolio(&config.nmvm_model().unwrap(), &config.market.unwrap()).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("optimize.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let record = reader.records().next().unwrap().unwrap();
    let field = |name: &str| record[header.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(field("q_min").parse::<f64>().unwrap(), expected.q_min);
    assert_eq!(field("x_1").parse::<f64>().unwrap(), expected.x_star[0]);
    assert_eq!(field("x_2").parse::<f64>().unwrap(), expected.x_star[1]);
}

#[test]
fn sweep_has_one_row_per_step_and_matches_the_serial_sweep() {
    let config = parse_config(&example("sweep")).unwrap();
    let report = execute(&config).unwrap();
    assert_eq!(report.table.rows.len(), 12);

    let Some(ScheduleSection::Perturbation(spec)) = &config.schedule else { panic!() };
    let mut spec = spec.clone();
    spec.seed = config.seed;
    let model = config.nmvm_model().unwrap();
    let schedule = make_schedule(&model, &spec).unwrap();
    let serial = run_sweep(&model, &config.market.unwrap(), &schedule, &SweepOptions::default()).unwrap();
    let column = |name: &str| report.table.header.iter().position(|h| h == name).unwrap();
    for (row, step) in report.table.rows.iter().zip(&serial.steps) {
        assert_eq!(row[column("n")], Cell::Int(step.n as u64));
        assert_eq!(real(&row[column("mean")]), step.mean);
        assert_eq!(real(&row[column("s_hat")]), step.s_hat);
    }
    let summary: String = report.summary.iter().map(|(k, v)| format!("{k}={v} ")).collect();
    assert!(summary.contains("failed=none"), "{summary}");
}

#[test]
fn scale_blowup_sweep_reports_failures() {
    let report = execute(&parse_config(&example("sweep_blowup")).unwrap()).unwrap();
    assert_eq!(report.table.rows.len(), 12);
    let failed = &report.summary.iter().find(|(k, _)| k == "failed").unwrap().1;
    assert_ne!(failed, "none");
}

#[test]
fn parallel_sampling_equals_the_serial_core() {
    let config = parse_config(&example("sample")).unwrap();
    let model = config.nmvm_model().unwrap();
    let n = 40_000;
    let parallel = ggc::parallel::sample_returns(&model, n, 7).unwrap();
    assert_eq!(parallel, NmvmSample::draw(&model, n, 7).unwrap());
    let law = config.law.as_ref().unwrap();
    assert_eq!(ggc::parallel::sample_mixing(law, n, 7).unwrap(), sample_mixing(law, n, 7).unwrap());
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    for stem in ["sample", "sweep_mixed", "distance"] {
        let dir = tempfile::tempdir().unwrap();
        let (a, _, e1) = ggc(dir.path(), &example(stem), &["--out", "a.out"]);
        let (b, _, e2) = ggc(dir.path(), &example(stem), &["--out", "b.out"]);
        assert_eq!((a, b), (0, 0), "{e1}{e2}");
        assert_eq!(fs::read(dir.path().join("a.out")).unwrap(), fs::read(dir.path().join("b.out")).unwrap(), "{stem}");
    }
}

#[test]
fn seed_override_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    ggc(dir.path(), &example("sample"), &["--out", "a.csv"]);
    ggc(dir.path(), &example("sample"), &["--out", "b.csv", "--seed", "43"]);
    assert_ne!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn text_format_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = ggc(dir.path(), &example("mean"), &["--format", "text", "--out", "mean.json"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("out=mean.json"), "{stdout}");
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("mean.json")).unwrap()).unwrap();
    assert_eq!(doc["command"], "mean");
    assert!(doc["rows"][0]["mean"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_command_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = example("optimize").replace("command = \"optimize\"", "command = \"frobnicate\"");
    let (code, stdout, stderr) = ggc(dir.path(), &config, &[]);
    assert_eq!(code, 2);
    assert!(stdout.starts_with("status=config"), "{stdout}");
    assert!(stderr.contains("command"), "{stderr}");
    assert_eq!(entries(dir.path()), vec![dir.path().join("run.toml")]);
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_ggc")).current_dir(dir.path()).args(["--config", "nope.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(entries(dir.path()).is_empty());
}

#[test]
fn domain_failure_exits_one_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = example("distance").replace("max_error = 0.0001", "max_error = 1e-300").replace("cells = 2048", "cells = 8");
    let (code, stdout, stderr) = ggc(dir.path(), &config, &[]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.starts_with("status=domain"), "{stdout}");
    assert!(stderr.contains("grid too coarse"), "{stderr}");
    assert_eq!(entries(dir.path()), vec![dir.path().join("run.toml")]);
}

#[test]
fn unwritable_output_exits_one_and_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("taken")).unwrap();
    let (code, stdout, _) = ggc(dir.path(), &example("mean"), &["--out", "taken"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.starts_with("status=io"), "{stdout}");
    assert_eq!(entries(dir.path()), vec![dir.path().join("run.toml"), dir.path().join("taken")]);
    assert!(entries(&dir.path().join("taken")).is_empty());
}

#[test]
fn run_creates_missing_parent_directories() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = parse_config(&example("laplace")).unwrap();
    config.output.path = Some(dir.path().join("nested").join("lap.json"));
    config.output.format = Format::Text;
    let outcome = run(&config).unwrap();
    assert!(outcome.summary.contains("rows=6"), "{}", outcome.summary);
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(&outcome.path).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
}
