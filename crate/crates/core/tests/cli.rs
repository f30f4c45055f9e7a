use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zeromode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeromode"))
        .args(args)
        .env_remove("ZEROMODE_DIM")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(m) => {
                m.remove("runtime_ms");
                m.values_mut().for_each(strip);
            }
            Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v
}

#[test]
fn gamma_check_dimension_nine_passes() {
    let out = zeromode(&["gamma-check", "--dim", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert_eq!(r["parameters"]["n"], 9);
        assert!(r["computed"].as_f64().unwrap() <= 1e-14);
        assert_eq!(r["pass"], true);
    }
    assert_eq!(doc["header"]["tolerance_config"]["version"], 1);
}

#[test]
fn injected_fault_exits_with_failure() {
    let out = zeromode(&["gamma-check", "--inject-fault", "gamma2"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], false);
    assert_eq!(doc["reports"][0]["pass"], false);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["frobnicate"],
        vec!["gamma-check", "--bogus"],
        vec!["gamma-check", "--s", "2"],
        vec!["gamma-check", "--order", "3"],
        vec!["gamma-check", "--tol", "nope=1"],
        vec!["identity-check", "--eps", "-0.1"],
        vec!["zeromode-verify", "--dim", "4"],
        vec![],
    ] {
        let out = zeromode(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn constants_report_for_three_dimensions() {
    let out = zeromode(&["constants", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let sharp = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check_name"] == "constants.sharpness")
        .unwrap();
    assert!((sharp["computed"].as_f64().unwrap() - 16.434).abs() < 1e-3);
    assert!((sharp["target"].as_f64().unwrap() - 16.433712).abs() < 1e-5);
}

#[test]
fn tolerance_override_can_fail_a_check() {
    let out = zeromode(&["nullspace-psi0", "--tol", "zeromode.nullspace=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let out = zeromode(&["yamabe-min", "--tol", "yamabe.bubble=1e-9"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["header"]["tolerance_config"]["values"]["yamabe.bubble"], 1e-9);
}

#[test]
fn environment_mirrors_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_zeromode"))
        .args(["gamma-check"])
        .env("ZEROMODE_DIM", "5")
        .env("ZEROMODE_S", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["reports"][0]["parameters"]["n"], 5);
    assert_eq!(doc["reports"][0]["parameters"]["s"], -1);
}

#[test]
fn reruns_are_identical_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.json"));
        let out = zeromode(&["yamabe-min", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        docs.push(without_timing(read_json(&path)));
    }
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn csv_output_writes_reports_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("yamabe.csv");
    let out = zeromode(&["yamabe-min", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "check_name");
    assert_eq!(reader.records().count(), 6);
    let trace = dir.path().join("yamabe.yamabe.descent_trace.csv");
    let text = std::fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("index,value"));
    assert!(text.lines().count() > 2);
}

#[test]
fn identity_check_on_default_grid() {
    let out = zeromode(&["identity-check", "--dim", "3", "--eps", "0.1", "--grid", "129", "--radius", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &doc["artifacts"]["identity.bump.0"][0];
    assert!(report["defect"].as_f64().unwrap() < 1e-2);
    assert!(report["lhs"].as_f64().unwrap() >= 0.0);
    assert_eq!(report["term_K"], 0.0);
}
