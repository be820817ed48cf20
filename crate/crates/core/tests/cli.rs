//! End-to-end tests of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractal-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g2.csv");
    let out = run(&["spectrum", "grigorchuk", "--level", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("eigenvalue,multiplicity,distance,inside"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn outputs_are_byte_identical() {
    let args = ["spectrum", "gamma", "-n", "4", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["correspondence", "gamma", "-n", "2", "--alpha-step", "0.25"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["verify", "--only", "block-identities", "--max-level", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn group_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let text = include_str!("../data/grigorchuk.group").replace("name = grigorchuk", "name = grigorchuk-copy");
    std::fs::write(&path, text).unwrap();
    let from_file = run(&["spectrum", "--group-file", path.to_str().unwrap(), "-n", "5"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let builtin = run(&["spectrum", "grigorchuk", "-n", "5"]);
    let values = |o: &Output| -> Vec<String> { data_rows(&stdout(o)).into_iter().map(|r| r[0].clone()).collect() };
    assert_eq!(values(&from_file), values(&builtin));
}

#[test]
fn graph_round_trips_through_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.dot");
    let out = run(&["graph", "gamma", "-n", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let graph = fractal_spectra::schreier::dot::parse_graph(&text).unwrap();
    let group = fractal_spectra::automata::builtin_group("gamma").unwrap();
    let direct = fractal_spectra::schreier::action_graph(&group, 3);
    assert!(fractal_spectra::schreier::rooted_labeled_isomorphic(&graph, &direct).unwrap());
}

#[test]
fn growth_examples() {
    let exponent = |args: &[&str]| -> f64 {
        let text = stdout(&run(args));
        let line = text.lines().find(|l| l.contains("growth_exponent=")).expect("growth line");
        line.split("growth_exponent=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
    };
    let linear = exponent(&["graph", "grigorchuk", "--level", "12", "--growth", "--format", "csv"]);
    assert!((0.85..=1.15).contains(&linear), "{linear}");
    let gamma = exponent(&["graph", "gamma", "--level", "9", "--growth"]);
    assert!((1.45..=1.75).contains(&gamma), "{gamma}");
}

#[test]
fn correspondence_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("c.svg");
    let out = run(&["correspondence", "gamma", "-n", "3", "--format", "svg", "--out", svg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains(">α</text>"));
    let csv = stdout(&run(&["correspondence", "gamma", "-n", "3", "--alpha-min", "0", "--alpha-max", "0"]));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 27);
    assert!(rows.iter().all(|r| r[0] == "0" && r[1].parse::<f64>().unwrap().abs() <= 2.0 + 1e-12));
}

#[test]
fn substitution_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gamma.subst");
    let dump = run(&["substitute", "--dump-system", "--out", path.to_str().unwrap()]);
    assert!(dump.status.success());
    let from_file = run(&["substitute", "--system", path.to_str().unwrap(), "--steps", "2"]);
    let builtin = run(&["substitute", "--steps", "2"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, builtin.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "gamma"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "gamma", "-n", "12"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "nosuch", "-n", "1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let missing = run(&["spectrum", "--group-file", "/nonexistent/file", "-n", "1"]);
    assert_eq!(missing.status.code(), Some(1));

    let ok = run(&["verify", "--only", "nesting,markov-hecke", "--max-level", "3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 2);
    assert!(report.get("seconds").is_none());

    let mutated = run(&["verify", "--only", "product-formula", "--max-level", "4", "--samples", "5", "--perturb-phi", "0.001"]);
    assert_eq!(mutated.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mutated.stderr).contains("FAIL"));
}

#[test]
fn thread_override_is_validated() {
    let bad = bin().env("FRACTAL_SPECTRA_THREADS", "zero").args(["spectrum", "gamma", "-n", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let good = bin().env("FRACTAL_SPECTRA_THREADS", "1").args(["spectrum", "gamma", "-n", "1"]).output().unwrap();
    assert!(good.status.success());
}

#[test]
fn verify_report_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["verify", "--only", "julia", "--timings", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(Path::new(&path).exists());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["seconds"].is_number());
}
