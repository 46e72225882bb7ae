use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zeno-dephase"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("RUST_LOG", "off").output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const OHMIC: [&str; 6] = [
    "--set",
    "bath.kind=ohmic",
    "--set",
    "bath.coupling=0.5",
    "--set",
    "bath.cutoff=15",
];

fn run_with(extra: &[&str]) -> Output {
    let mut args = vec!["run"];
    args.extend_from_slice(&OHMIC);
    args.extend_from_slice(extra);
    run(&args)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn empty_config_names_the_missing_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    fs::write(&path, "").unwrap();
    let o = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing key: bath.kind"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    let o = run_with(&["--set", "system.spin=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("system.spin"));
    let o = run_with(&["--set", "bath.cutoff=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_recipe_lists_valid_names() {
    let o = run(&["recipe", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fig1"));
}

#[test]
fn oversized_sum_exits_with_budget_status() {
    let o = run_with(&["--set", "mode=correlated", "--set", "system.j=2", "--set", "schedule.measurements=6"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn header_is_always_written() {
    let o = run_with(&["--set", "schedule.grid.points=2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("tau,gamma_rate,survival,N,J,error"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn correlated_rows_carry_term_counts() {
    let o = run_with(&[
        "--set",
        "mode=correlated",
        "--set",
        "schedule.measurements=3",
        "--set",
        "schedule.grid.points=3",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r["term_count"], 64);
        assert!(r["survival"].as_f64().unwrap() <= 1.0);
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let extra = ["--set", "mode=collective", "--set", "system.j=2", "--set", "schedule.grid.points=40"];
    let a = run_with(&[&["--jobs", "1"][..], &extra].concat());
    let b = run_with(&[&["--jobs", "3"][..], &extra].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn metadata_reproduces_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let o = run_with(&[
        "--set",
        "mode=master",
        "--set",
        "system.j=1",
        "--set",
        "system.omega0=0.1",
        "--set",
        "schedule.grid.end=0.3",
        "--set",
        "schedule.grid.points=7",
        "--output",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("first.csv.meta.json")).unwrap()).unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, serde_json::to_string(&meta["config"]).unwrap()).unwrap();
    let second = dir.path().join("second.csv");
    let o = run(&["run", "--config", config.to_str().unwrap(), "--output", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

fn local_maxima(v: &[f64]) -> usize {
    v.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

#[test]
fn first_figure_solid_curve_peaks_once() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["recipe", "fig1", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let config = dir.path().join("fig1-solid.json");
    assert!(Path::new(&config).exists());
    let o = run(&["run", "--config", config.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rates = column(&String::from_utf8(o.stdout).unwrap(), "gamma_rate");
    assert_eq!(rates.len(), 500);
    assert_eq!(local_maxima(&rates), 1);
}

#[test]
fn crossover_mode_lists_refined_extrema() {
    let o = run_with(&["--set", "mode=crossover", "--set", "crossover.rate=single", "--set", "schedule.grid.end=2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tau,gamma_rate,kind,index,N,J,refined");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains(",max,1,"));
}

#[test]
fn oracle_check_passes() {
    let o = run(&["oracle-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
