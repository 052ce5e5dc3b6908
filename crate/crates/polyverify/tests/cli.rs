//! End-to-end tests of the command-line interface: exit codes, report
//! contents, determinism of reports modulo wall-clock fields.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_polyverify")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn polyverify")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

const RELU_UNSAT: &str = r#"{
  "network": {"kind": "relu",
              "layers": [{"W": [[1.0]], "b": [0.0], "nonlinear": true},
                         {"W": [[1.0]], "b": [0.0], "nonlinear": false}]},
  "input_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": -1.0}, {"w": [1.0], "c": -1.0}]},
  "output_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": 0.0}, {"w": [1.0], "c": -0.5}]}
}"#;

const RELU_SAT: &str = r#"{
  "network": {"kind": "relu",
              "layers": [{"W": [[1.0]], "b": [0.0], "nonlinear": true},
                         {"W": [[1.0]], "b": [0.0], "nonlinear": false}]},
  "input_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": -1.0}, {"w": [1.0], "c": -1.0}]},
  "output_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": -0.1}, {"w": [1.0], "c": -1.1}]}
}"#;

#[test]
fn verify_unsat_fixture_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "unsat.json", RELU_UNSAT);
    let out = run(&["verify", "--problem", &problem]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "UNSAT");
    assert!((report["witness"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(report["constraint_index"], 1);
    assert!(report["margin"].as_f64().unwrap() > 0.4);
}

#[test]
fn verify_sat_fixture_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "sat.json", RELU_SAT);
    let out = run(&["verify", "--problem", &problem]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "SAT");
    assert!(report.get("witness").is_none());
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["verify", "--problem", "/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_json_reports_location_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "bad.json", "{\"network\": [trailing");
    let out = run(&["verify", "--problem", &problem]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "diagnostics missing location: {stderr}");
}

#[test]
fn conflicting_input_modes_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "p.json", RELU_SAT);
    let out = run(&["verify", "--problem", &problem, "--network", &problem]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deep_network_rejected_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(
        dir.path(),
        "deep.json",
        r#"{
  "network": {"kind": "relu",
              "layers": [{"W": [[1.0]], "b": [0.0], "nonlinear": true},
                         {"W": [[1.0]], "b": [0.0], "nonlinear": true},
                         {"W": [[1.0]], "b": [0.0], "nonlinear": false}]},
  "input_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": -1.0}, {"w": [1.0], "c": -1.0}]},
  "output_polytope": {"dim": 1, "constraints": [{"w": [1.0], "c": -1.0}]}
}"#,
    );
    let out = run(&["verify", "--problem", &problem]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_two_crossing_lines() {
    let dir = tempfile::tempdir().unwrap();
    let arr = write(
        dir.path(),
        "arr.json",
        r#"{"dim": 2, "functionals": [{"w": [1.0, 0.0], "c": 0.0}, {"w": [0.0, 1.0], "c": 0.0}]}"#,
    );
    let out = run(&["enumerate", "--arrangement", &arr]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["regions"], 4);
}

#[test]
fn enumerate_respects_region_bound_and_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let arr = write(
        dir.path(),
        "arr4.json",
        r#"{"dim": 2, "functionals": [
            {"w": [1.0, 0.1], "c": -0.2}, {"w": [-0.3, 1.0], "c": 0.1},
            {"w": [0.9, -0.7], "c": 0.3}, {"w": [0.2, 0.8], "c": -0.5}]}"#,
    );
    let out = run(&["enumerate", "--arrangement", &arr, "--check", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let regions = report["regions"].as_u64().unwrap();
    assert!(regions <= 11, "N=4, n=2 bound is 11");
    assert_eq!(report["agreed"], true);
    assert_eq!(report["trace"].as_array().unwrap().len() as u64, regions);
}

#[test]
fn degenerate_arrangement_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let arr = write(
        dir.path(),
        "zero.json",
        r#"{"dim": 2, "functionals": [{"w": [0.0, 0.0], "c": 1.0}]}"#,
    );
    let out = run(&["enumerate", "--arrangement", &arr]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_is_monotone_and_bounded() {
    let out = run(&[
        "bench", "--arch", "shallow", "--sizes", "4,8,16", "--dim", "2", "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lp_calls = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let size: usize = cols[1].parse().unwrap();
        let regions: u128 = cols[3].parse().unwrap();
        lp_calls.push(cols[4].parse::<u64>().unwrap());
        // Arrangement: `size` neuron hyperplanes + 4 box constraints.
        let bound = polyverify::arrangement::region_count_bound(size + 4, 2);
        assert!(regions <= bound, "regions {regions} over bound {bound}");
    }
    assert!(lp_calls.windows(2).all(|w| w[0] < w[1]), "lp_calls not monotone: {lp_calls:?}");
}

#[test]
fn bench_repeats_are_identical_modulo_wall_time() {
    let args = [
        "bench", "--arch", "tll", "--sizes", "2,3", "--dim", "2", "--terms", "2", "--seed", "5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let strip = |raw: &[u8]| -> Vec<String> {
        String::from_utf8_lossy(raw)
            .lines()
            .map(|l| l.rsplit_once(',').map(|(head, _wall)| head.to_string()).unwrap())
            .collect()
    };
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
}

#[test]
fn verify_report_is_deterministic_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "unsat.json", RELU_UNSAT);
    let strip = |raw: &[u8]| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_slice(raw).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    let a = run(&["verify", "--problem", &problem, "--exhaustive"]);
    let b = run(&["verify", "--problem", &problem, "--exhaustive"]);
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
}

#[test]
fn check_subcommand_agrees_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "unsat.json", RELU_UNSAT);
    let out = Command::new(bin())
        .args(["check", "--problem", &problem, "--trials", "200"])
        .env("POLYVERIFY_SEED", "12648430")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["agreed"], true);
    assert_eq!(report["verdict"], "UNSAT");
}

#[test]
fn separate_file_input_mode_works() {
    let dir = tempfile::tempdir().unwrap();
    let network = write(
        dir.path(),
        "net.json",
        r#"{"kind": "tll", "n": 1, "m": 1, "N": 2, "M": 2,
            "components": [{"W_ell": [[1.0], [-1.0]], "b_ell": [0.0, 0.0],
                            "selectors": [[1], [2]]}]}"#,
    );
    let px = write(
        dir.path(),
        "px.json",
        r#"{"dim": 1, "constraints": [{"w": [-1.0], "c": -2.0}, {"w": [1.0], "c": -2.0}]}"#,
    );
    let py = write(
        dir.path(),
        "py.json",
        r#"{"dim": 1, "constraints": [{"w": [-1.0], "c": -0.5}, {"w": [1.0], "c": -1.5}]}"#,
    );
    let out = run(&[
        "verify",
        "--network",
        &network,
        "--input-polytope",
        &px,
        "--output-polytope",
        &py,
        "--threads",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["witness"][0].as_f64().unwrap().abs() > 1.5);
    assert!(report["margin"].as_f64().unwrap() > 0.4);
}
