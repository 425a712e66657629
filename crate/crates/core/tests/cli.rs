//! End-to-end runs of the binary.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncschwartz"))
        .args(args)
        .env_remove("NCS_T")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn nuclearity_report() {
    let out = run(&["weights", "nuclearity", "--T", "2000"]);
    let v = json(&out);
    assert!((v["sum"].as_f64().unwrap() - 2.704164).abs() < 1e-5);
    assert!((v["target"].as_f64().unwrap() - 2.705808).abs() < 1e-5);
    assert_eq!(v["pass"], false);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decide_prints_witness() {
    let out = run(&["member", "decide", "--space", "MS", "--envelope", "diag:j^5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["decisions"][0]["witness"], "n(N)=N+5");
}

#[test]
fn nonq_demo_matches() {
    let out = run(&["demo", "nonq", "--k", "100", "--N", "0"]);
    let v = json(&out);
    assert_eq!(v["seminorm"], 0.01);
    assert_eq!(v["singularWitness"], "e_100");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"seminorm\": 0.01,"));
}

#[test]
fn malformed_json_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, "{\"dim\": 2,\n\"entries\": [[1, 0], [0, 0],\n [0, 0] [1, 0]]}").unwrap();
    let out = run(&["norm", "matrix", "--N", "1", "--n", "1", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("m.json:3:"), "{err}");
}

#[test]
fn csv_input_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    fs::write(&x, "1,2\n3,4\n").unwrap();
    fs::write(&y, "5,6\n7,8\n").unwrap();
    let out = run(&[
        "merge",
        "--input",
        x.to_str().unwrap(),
        "--other",
        y.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1.0,0.0,2.0,0.0\n7.0,0.0,4.0,0.0\n");

    let out = run(&["norm", "matrix", "--N", "1", "--n", "0", "--p", "1", "--input", x.to_str().unwrap()]);
    // weights A(1,0) = max(i, j): 1 + 2*2 + 3*2 + 4*2
    assert_eq!(json(&out)["norm"], 19.0);

    fs::write(&x, "1,2\n3\n").unwrap();
    let out = run(&["diag", "project", "--input", x.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seminorm_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.json");
    let b = dir.path().join("b.json");
    fs::write(&x, r#"{"dim": 2, "entries": [[1, 0], [0, 2], [0.5, 0], [3, -1]]}"#).unwrap();
    fs::write(&b, r#"{"vectors": [{"entries": {"1": [1, 0]}}, {"entries": {"2": [0, 1]}}]}"#).unwrap();
    let out = run(&["norm", "seminorm", "--n", "2", "--input", x.to_str().unwrap(), "--set", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["pass"].as_bool().unwrap());
}

#[test]
fn env_overrides_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_ncschwartz"))
        .args(["weights", "nuclearity"])
        .env("NCS_T", "10")
        .env("NCS_TOL", "1")
        .output()
        .unwrap();
    let v = json(&out);
    assert_eq!(v["T"], 10);
    assert_eq!(v["pass"], true);
}

#[test]
fn invalid_inputs_exit_two() {
    assert_eq!(run(&["member", "decide", "--envelope", "term(rho=2)"]).status.code(), Some(2));
    assert_eq!(run(&["member", "decide", "--space", "XYZ", "--envelope", "identity"]).status.code(), Some(2));
    assert_eq!(run(&["interp", "probe", "--N", "0", "--M", "1", "--K", "3", "--theta", "3/4"]).status.code(), Some(2));
    assert_eq!(run(&["weights", "eval", "--i", "0", "--j", "1", "--N", "0", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["norm", "matrix", "--N", "0", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn text_format() {
    let out = run(&["weights", "eval", "--i", "2", "--j", "3", "--N", "1", "--n", "1", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exact: 3/2"), "{text}");
}
