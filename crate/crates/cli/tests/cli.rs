use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon-chroma")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("graphon-chroma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn phi_of_builtins() {
    let out = bin(&["phi", "--graphon", "W_R"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["phi"].as_f64().unwrap() - 0.86643).abs() < 1e-5);
    let v = json(&bin(&["phi", "--graphon", "figure-block"]));
    assert!((v["phi"].as_f64().unwrap() - 14.0 / 9.0 * std::f64::consts::LN_2).abs() < 1e-11);
    assert_eq!(v["witness_support"], serde_json::json!([0, 1, 2]));
    let v = json(&bin(&["phi", "--graphon", "constant:0.5"]));
    assert!((v["phi"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-11);
}

#[test]
fn phistar_reports_bounds_and_prediction() {
    let v = json(&bin(&["phistar", "--graphon", "figure-block", "--n", "1000"]));
    let value = v["value"].as_f64().unwrap();
    assert!(v["bounds"]["lower"].as_f64().unwrap() <= value && value <= v["bounds"]["upper"].as_f64().unwrap());
    assert_eq!(v["balanced_optimal"], false);
    let want = value * 1000.0 / (2.0 * 1000f64.ln());
    assert!((v["prediction"].as_f64().unwrap() - want).abs() < 1e-8);
}

#[test]
fn closed_form_matches_phi() {
    let v = json(&bin(&["closed-form", "--family", "block2", "--p-vec", "0.6,0.4", "--p", "0.2"]));
    let cf = v["value"].as_f64().unwrap();
    let m = scratch("b2.json", r#"{"masses":[0.5,0.5],"P":[[0.6,0.2],[0.2,0.4]]}"#);
    let v = json(&bin(&["phi", "--graphon", m.to_str().unwrap()]));
    assert!((v["phi"].as_f64().unwrap() - cf).abs() < 1e-10);
}

#[test]
fn asymmetric_graphon_is_an_error() {
    let p = scratch("asym.json", r#"{"masses":[0.5,0.5],"P":[[0.1,0.2],[0.3,0.1]]}"#);
    let out = bin(&["phi", "--graphon", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "invalid_graphon");
}

#[test]
fn usage_errors_exit_2() {
    let out = bin(&["phi"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "usage");
    let out = bin(&["phi", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "usage");
    let out = bin(&["simulate", "--graphon", "figure-block", "--n", "50", "--strategies", "magic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_trials_is_an_empty_pass() {
    let out = bin(&["properties", "--trials", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"], serde_json::json!([]));
}

#[test]
fn properties_csv() {
    let out = bin(&["properties", "--trials", "5", "--suites", "monotonicity,identity", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["suite,trials,failures,passed", "monotonicity,5,0,true", "identity,5,0,true"]);
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--graphon", "figure-block", "--n", "200", "--seeds", "3,4"];
    let a = bin(&args);
    let b = bin(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,n,strategy,colours_used,prediction,ratio"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn manifest_rejects_unknown_keys() {
    let m = scratch("bad.json", r#"{"graphon":"W_R","colour_count":3}"#);
    let out = bin(&["phi", "--config", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "parse");
    assert!(v["error"]["message"].as_str().unwrap().contains("colour_count"));
}

#[test]
fn flags_override_manifest() {
    let m = scratch("run.json", r#"{"graphon":"W_R","n":40,"seed":1}"#);
    let from_file = json(&bin(&["phi", "--config", m.to_str().unwrap()]));
    assert_eq!(from_file["graphon"], "W_R");
    let overridden = json(&bin(&["phi", "--config", m.to_str().unwrap(), "--graphon", "figure-block"]));
    assert_eq!(overridden["graphon"], "figure-block");
}

#[test]
fn sample_and_colour_agree_on_n() {
    let edges = String::from_utf8(bin(&["sample", "--graphon", "constant:0.5", "--n", "30", "--seed", "2"]).stdout).unwrap();
    assert_eq!(edges.lines().next(), Some("n 30 seed 2"));
    for line in edges.lines().skip(1) {
        let (i, j) = line.split_once(' ').unwrap();
        assert!(i.parse::<usize>().unwrap() < j.parse::<usize>().unwrap());
    }
    let v = json(&bin(&["colour", "--graphon", "constant:0.5", "--n", "30", "--seed", "2", "--strategies", "dsatur"]));
    assert_eq!(v["assignment"].as_array().unwrap().len(), 30);
}

#[test]
fn split_covers_every_vertex() {
    let v = json(&bin(&["split", "--graphon", "figure-block", "--n", "120", "--seed", "9"]));
    let mut all: Vec<u64> = v["parts"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| p["vertices"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()))
        .collect();
    all.sort();
    assert_eq!(all, (0..120).collect::<Vec<u64>>());
}

#[test]
fn out_writes_file() {
    let dir = std::env::temp_dir().join(format!("graphon-chroma-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("phi.json");
    let out = bin(&["phi", "--graphon", "W_R", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["phi"].is_number());
}
