use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_node-certainty"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fig1.json")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

/// Parses the `curves` format into its header and numeric rows.
fn curves(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn analyze_fig1() {
    let report = json(&run(&["analyze", fixture().to_str().unwrap()]));
    assert_eq!(report["command"], "analyze");
    let results = &report["results"];
    assert_eq!(floats(&results["degree"]), vec![3.0, 3.0, 2.0, 2.0, 2.0]);
    let mu = floats(&results["routes"][0]["mu"]);
    let expect = [110.0 / 13.0, 110.0 / 13.0, 110.0 / 21.0, 110.0 / 21.0, 5.0];
    for (a, b) in mu.iter().zip(expect) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(results["route_agreement"].as_f64().unwrap() < 1e-9);
}

#[test]
fn two_node_directed_file() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "two.json", r#"{"n": 2, "edges": [[1, 2, 1]]}"#);
    let report = json(&run(&["analyze", &path]));
    assert_eq!(report["profile"]["strongly_connected"], false);
    let routes = report["results"]["routes"].as_array().unwrap();
    assert!(routes.iter().all(|r| r["applicable"] == false));
}

#[test]
fn malformed_weight_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.json", r#"{"n": 2, "edges": [[1, 2, "x"]]}"#);
    let out = run(&["analyze", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("weight"), "{err}");

    let out = run(&["analyze", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.json"));

    assert_eq!(run(&["family", "wheel:5:1"]).status.code(), Some(2));
}

#[test]
fn out_of_range_node_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "range.json", r#"{"n": 2, "edges": [[1, 3, 1.0]]}"#);
    assert_eq!(run(&["verify", &path]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_fig1() {
    let out = run(&["verify", fixture().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = report["results"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    assert!(checks.iter().filter(|c| c["gated"] == true).all(|c| c["status"] == "pass"));
}

#[test]
fn family_complete_nine() {
    let out = run(&["--format", "csv", "family", "complete:9:1"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let closed: f64 = r[1].parse().unwrap();
        let spectral: f64 = r[3].parse().unwrap();
        assert!((closed - 20.25).abs() < 1e-9 && (spectral - 20.25).abs() < 1e-9);
    }
}

#[test]
fn empty_sample_times_give_header_only_csv() {
    let out = run(&[
        "--format",
        "csv",
        "simulate",
        fixture().to_str().unwrap(),
        "--trajectories",
        "16",
        "--sample-times",
        "",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("time,node,"));
}

#[test]
fn curves_stay_between_envelopes() {
    let out = run(&["--format", "curves", "--sigma", "1.5", "analyze", fixture().to_str().unwrap()]);
    let (header, rows) = curves(&out);
    assert_eq!(header.last().unwrap(), "lower");
    assert_eq!(rows.len(), 101);
    let nodes = header.len() - 3;
    for row in rows {
        let (upper, lower) = (row[nodes + 1], row[nodes + 2]);
        assert!((upper - 2.25 * row[0]).abs() < 1e-12);
        for &v in &row[1..=nodes] {
            assert!(v >= lower - 1e-9 && v <= upper + 1e-9);
        }
    }
}

#[test]
fn star_center_curve_matches_complete() {
    let args = |s: &'static str| run(&["--format", "curves", "--t-max", "3", "--t-step", "0.1", "family", s]);
    let (_, star) = curves(&args("undirected_star:9:1"));
    let (_, complete) = curves(&args("complete:9:1"));
    assert_eq!(star.len(), complete.len());
    for (a, b) in star.iter().zip(&complete) {
        assert!((a[1] - b[1]).abs() <= 1e-9);
    }
}

#[test]
fn output_flag_and_graph_round_trip() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("report.json");
    let status = bin()
        .args(["-o", out_path.to_str().unwrap(), "analyze", fixture().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let echoed = serde_json::to_string(&report["config"]["graph"]).unwrap();
    let path = write(&dir, "echo.json", &echoed);
    let again = json(&run(&["analyze", &path]));
    assert_eq!(again["results"], report["results"]);
}

#[test]
fn simulate_is_deterministic_across_threads() {
    let f = fixture();
    let go = |threads: &str| {
        let out = run(&[
            "--seed",
            "11",
            "simulate",
            f.to_str().unwrap(),
            "--trajectories",
            "1500",
            "--sample-times",
            "0.5,1",
            "--horizon",
            "1",
            "--threads",
            threads,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(go("1"), go("3"));
}
