use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stokes(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokes"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn roots_of_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let out = stokes(dir.path(), &["roots", "--poly", "1,0,-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["command"], "roots");
    let mut xs: Vec<f64> = v["result"]["turning_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["location"][0].as_f64().unwrap())
        .collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs.len(), 2);
    assert!((xs[0] + 1.0).abs() < 1e-10 && (xs[1] - 1.0).abs() < 1e-10);
    let file: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("roots.json")).unwrap()).unwrap();
    assert_eq!(file, v);
}

#[test]
fn malformed_polynomial_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = stokes(dir.path(), &["roots", "--poly", "1,,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn stokes_graph_edge_counts() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&stokes(dir.path(), &["stokes-graph", "--poly", "1,0,-1"]));
    assert_eq!(v["result"]["finite_edge_count"], 1);
    let v = json_of(&stokes(dir.path(), &["stokes-graph", "--poly", "1,0"]));
    assert_eq!(v["result"]["escaping_edge_count"], 3);
    let v = json_of(&stokes(dir.path(), &["stokes-graph", "--poly", "1,0,-1", "--t", "0.3"]));
    assert_eq!(v["result"]["finite_edge_count"], 0);
    assert_eq!(v["t"], 0.3);
}

#[test]
fn svg_output_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = stokes(
        dir.path(),
        &["--format", "json,svg", "stokes-graph", "--poly", "1,0,0,-1"],
    );
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("stokes_graph.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(dir.path().join("stokes_graph.json").exists());
}

#[test]
fn truncation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"l_max_multiplier": 0.01}"#).unwrap();
    let out = stokes(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "stokes-graph", "--poly", "1,0,-1"],
    );
    assert_eq!(out.status.code(), Some(4));
    let v = json_of(&out);
    assert!(v["result"]["truncated_count"].as_u64().unwrap() > 0);
    assert_eq!(v["config"]["l_max_multiplier"], 0.01);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"delta_hit": -1}"#).unwrap();
    let out = stokes(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "roots", "--poly", "1,0,-1"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_ray_for_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&stokes(dir.path(), &["rays", "--poly", "1,0,-1"]));
    let rays = v["result"]["rays"].as_array().unwrap();
    assert_eq!(rays.len(), 1);
    assert!(rays[0]["angle"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn harmonic_oscillator_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let out = stokes(
        dir.path(),
        &[
            "--format",
            "json,csv",
            "eigenvalues",
            "--poly",
            "1,0,-1",
            "--n",
            "0..5",
            "--order",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let est = v["result"]["rays"][0]["estimates"].as_array().unwrap();
    assert_eq!(est.len(), 6);
    for (k, e) in est.iter().enumerate() {
        let re = e["value"][0].as_f64().unwrap();
        let im = e["value"][1].as_f64().unwrap();
        assert!((re - (2 * k + 1) as f64).abs() < 1e-9 && im.abs() < 1e-9);
    }
    let csv = fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("ray,n,re,im"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn bad_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = stokes(dir.path(), &["eigenvalues", "--poly", "1,0,-1", "--n", "5..2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strip_realize_count() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&stokes(dir.path(), &["strip-realize", "5", "7"]));
    assert_eq!(v["result"]["count"], 7);
    assert_eq!(v["result"]["strip"]["nodes"].as_array().unwrap().len(), 5);
    let out = stokes(dir.path(), &["strip-realize", "3", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "7", "geodesics", "--poly", "1,0,-2,1", "--t", "0.1"];
    let a = stokes(dir.path(), &args);
    let first = fs::read(dir.path().join("geodesics.json")).unwrap();
    let b = stokes(dir.path(), &args);
    let second = fs::read(dir.path().join("geodesics.json")).unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, second);
    assert_eq!(json_of(&a)["config"]["seed"], 7);
}
