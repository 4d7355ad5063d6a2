use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dihg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dihg"))
        .args(args)
        .env_remove("DIHG_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn family_file(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["family"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--output", path.to_str().unwrap()]);
    let out = dihg(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SINGLE_EDGE: &str = r#"{"d": 1, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "0", "hi": "1"}]}]}"#;

#[test]
fn premise_failure_exits_two_with_counterexample() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "single.json", SINGLE_EDGE);
    let out = dihg(&["premise", "--input", p(&input), "--n", "2", "--mode", "contains"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "negative");
    assert_eq!(r["premise"]["holds"], false);
    assert_eq!(r["premise"]["counterexample"]["cuts"], serde_json::json!([["1/2"]]));
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["target"]["n"], 2);
}

#[test]
fn premise_holding_exits_zero() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "single.json", SINGLE_EDGE);
    let out = dihg(&["premise", "--input", p(&input), "--n", "1", "--mode", "contained"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["premise"]["holds"], true);
}

#[test]
fn cover_on_example1() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "e1.json", &["example1", "--n", "2"]);
    let out = dihg(&["cover", "--input", p(&input), "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = &report(&out)["certificate"];
    assert_eq!(cert["kind"], "cover");
    assert_eq!(cert["partition"]["used_edges"].as_array().unwrap().len(), 2);
}

#[test]
fn match_on_dense_grid() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "grid.json", &["dense-grid", "--d", "2", "--parts", "4"]);
    let out = dihg(&["match", "--input", p(&input), "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = &report(&out)["certificate"];
    assert_eq!(cert["kind"], "matching");
    assert!(cert["partition"]["assignment"].as_array().unwrap().len() >= 2);
}

#[test]
fn cover_reports_failed_premise() {
    let dir = TempDir::new().unwrap();
    let half = r#"{"d": 1, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "0", "hi": "1/2"}]}]}"#;
    let input = write(&dir, "half.json", half);
    let out = dihg(&["cover", "--input", p(&input), "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["premise"]["holds"], false);
}

#[test]
fn example2_verifies() {
    let out = dihg(&["family", "example2", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["report"]["passed"], true);
    let rho = r["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["claim"].as_str().unwrap().starts_with("rho"))
        .expect("a rho check");
    assert_eq!(rho["actual"], "3");
}

#[test]
fn invariants_of_obs3() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "obs3.json", &["obs3", "--d", "2", "--n", "1"]);
    let out = dihg(&["invariants", "--input", p(&input), "--fractional"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["integer"]["iota"]["value"], 1);
    assert_eq!(r["integer"]["rho"]["value"], 2);
    assert_eq!(r["integer"]["rho"]["witness"]["edges"].as_array().unwrap().len(), 2);
    assert_eq!(r["fractional"]["rho_star"]["value"], "8/5");
}

#[test]
fn find_partition_and_balance() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "e1.json", &["example1", "--n", "2"]);
    let out = dihg(&["find-partition", "--input", p(&input), "--n", "2", "--mode", "contained", "--minimize"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["used_edges"].as_array().unwrap().len(), 2);

    let out = dihg(&["balance", "--input", p(&input), "--n", "2", "--mode", "contained", "--eps", "1/4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["point"]["converged"], true);
    assert_eq!(r["config"]["balance"]["epsilon"], "1/4");
}

#[test]
fn malformed_input_names_the_position() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", "{\"d\": 1,\n \"edges\": [{\"id\": 0, \"parts\": [{\"copy\": 1, \"lo\": 0}]}]}");
    let out = dihg(&["invariants", "--input", p(&input)]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["line"], 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let input = write(&dir, "flipped.json", r#"{"d": 1, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "1", "hi": "0"}]}]}"#);
    let r = report(&dihg(&["invariants", "--input", p(&input)]));
    assert_eq!(r["error"]["field"], "edges[0].parts[0].lo");
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "e1.json", &["example1", "--n", "3"]);
    let runs: Vec<Vec<u8>> = ["1", "4", "1"]
        .iter()
        .map(|t| dihg(&["cover", "--input", p(&input), "--n", "3", "--threads", t]).stdout)
        .collect();
    assert!(!runs[0].is_empty());
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn output_flag_and_threads_env() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "single.json", SINGLE_EDGE);
    let target = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_dihg"))
        .args(["premise", "-i", p(&input), "-n", "1", "-m", "contains", "-o", p(&target)])
        .env("DIHG_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(r["command"], "premise");
}

#[test]
fn generated_families_are_byte_identical() {
    let a = dihg(&["family", "obs3", "--d", "2", "--n", "2"]).stdout;
    let b = dihg(&["family", "obs3", "--d", "2", "--n", "2"]).stdout;
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 2 * 2 * 4usize.pow(2));
}
