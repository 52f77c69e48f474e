use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lipfree"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn temp(name: &str, contents: &Value) -> PathBuf {
    let path = std::env::temp_dir().join(format!("lipfree-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, contents.to_string()).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn line_molecule(terms: &[(&str, &str)]) -> Value {
    json!({
        "space": {"kind": "full", "dim": 1},
        "terms": terms.iter().map(|(x, a)| json!({"point": [x], "coeff": a})).collect::<Vec<_>>()
    })
}

#[test]
fn norm_of_worked_molecule() {
    let m = line_molecule(&[("1", "1"), ("2", "1")]);
    let path = temp("worked", &m);
    let one = stdout_json(&run(&["norm", path.to_str().unwrap(), "--p", "1"]));
    assert!((one["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(one["exact"], json!(true));
    let half = stdout_json(&run_stdin(&["norm", "-", "--p", "0.5", "--method", "dp"], &m.to_string()));
    assert!((half["value"].as_f64().unwrap() - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    assert_eq!(half["ground_size"], json!(3));
}

#[test]
fn norm_over_cap_reports_bounds() {
    let terms: Vec<(String, String)> = (1..=12).map(|i| (i.to_string(), "1".to_string())).collect();
    let refs: Vec<(&str, &str)> = terms.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let path = temp("big", &line_molecule(&refs));
    let out = stdout_json(&run(&["norm", path.to_str().unwrap(), "--cap", "6"]));
    assert_eq!(out["exact"], json!(false));
    let (lo, hi) = (out["sandwich"]["lower"].as_f64().unwrap(), out["sandwich"]["upper"].as_f64().unwrap());
    assert!(lo <= hi);
}

#[test]
fn cube_expand_and_reconstruct_round_trip() {
    let m = json!({"space": {"kind": "cube", "dim": 1}, "terms": [{"point": ["1/2"], "coeff": "1"}]});
    let path = temp("half", &m);
    let coeffs = stdout_json(&run(&["expand", path.to_str().unwrap(), "--basis", "cube", "--depth", "1"]));
    let entries = coeffs["coefficients"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["coeff"], json!([1, 2]));
    assert_eq!(entries[1]["coeff"], json!([1, 1]));
    let cpath = temp("half-coeffs", &coeffs);
    let back = stdout_json(&run(&["reconstruct", cpath.to_str().unwrap(), "--basis", "cube"]));
    assert_eq!(back["terms"], json!([{"point": [[1, 1]], "coeff": [1, 1]}]));
}

#[test]
fn rd_expand_of_delta_two() {
    let path = temp("two", &line_molecule(&[("2", "1")]));
    let coeffs = stdout_json(&run(&["expand", path.to_str().unwrap(), "--basis", "rd", "--depth", "0"]));
    let points: Vec<&Value> = coeffs["coefficients"].as_array().unwrap().iter().map(|e| &e["point"]).collect();
    assert_eq!(points, vec![&json!([[1, 0]]), &json!([[2, 0]])]);
    let cpath = temp("two-coeffs", &coeffs);
    let back = stdout_json(&run(&["reconstruct", cpath.to_str().unwrap(), "--basis", "rd"]));
    assert_eq!(back["terms"], json!([{"point": [[2, 0]], "coeff": [1, 1]}]));
}

#[test]
fn empty_molecule_expands_to_nothing() {
    let path = temp("empty", &json!({"space": {"kind": "cube", "dim": 2}, "terms": []}));
    let coeffs = stdout_json(&run(&["expand", path.to_str().unwrap(), "--basis", "cube", "--depth", "2"]));
    assert_eq!(coeffs["coefficients"], json!([]));
}

#[test]
fn probe_reports_ratio_within_envelope() {
    let out = stdout_json(&run(&["probe-lipschitz", "--d", "1", "--p", "0.5", "--mesh", "1/8"]));
    let measured = out["measured_max"].as_f64().unwrap();
    assert!(measured > 1.0 && measured <= out["envelope"].as_f64().unwrap());
    assert_eq!(out["argmax_pair"].as_array().unwrap().len(), 2);
    assert!(out["samples"].as_u64().unwrap() > 0);
}

#[test]
fn verify_is_deterministic_and_passes() {
    let args = ["verify", "--suite", "norm-oracle", "--d", "1", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["status"], json!("pass"));
}

#[test]
fn exit_codes() {
    let garbage = std::env::temp_dir().join(format!("lipfree-cli-{}-garbage.json", std::process::id()));
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(run(&["norm", garbage.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "-", "--basis", "rd", "--k-seq", "bogus"]).status.code(), Some(2));
    let third = temp("third", &line_molecule(&[("1/3", "1")]));
    assert_eq!(run(&["norm", third.to_str().unwrap()]).status.code(), Some(2));
    // 3/8 lies off the depth-1 lattice.
    let off = temp("off", &json!({"space": {"kind": "cube", "dim": 1}, "terms": [{"point": ["3/8"], "coeff": "1"}]}));
    assert_eq!(run(&["expand", off.to_str().unwrap(), "--basis", "cube", "--depth", "1"]).status.code(), Some(3));
    assert_eq!(run(&["norm", "/nonexistent/molecule.json"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let path = temp("outflag", &line_molecule(&[("1", "2")]));
    let dest = std::env::temp_dir().join(format!("lipfree-cli-{}-result.json", std::process::id()));
    let out = run(&["norm", path.to_str().unwrap(), "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}
