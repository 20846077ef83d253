use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spincorr")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn verdict(report: &Value, property: &str) -> String {
    report["report"]["properties"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["property"] == property)
        .unwrap()["verdict"]
        .as_str()
        .unwrap()
        .to_string()
}

#[test]
fn check_measure_on_derangement() {
    let out = run(&["check-measure", "--input", "fixture:derangement3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["format_version"], 1);
    assert_eq!(verdict(&v, "associated"), "holds");
    assert_eq!(verdict(&v, "downward-fkg"), "holds");
    assert_eq!(verdict(&v, "lattice"), "fails");
    assert!(out.stdout.ends_with(b"\n"));
}

#[test]
fn claimed_property_failure_exits_one() {
    let ok = run(&["check-measure", "--input", "fixture:derangement3", "--expect", "associated,downward-fkg"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&["check-measure", "--input", "fixture:derangement3", "--expect", "lattice"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["passed"], false);
}

#[test]
fn check_rates_on_contact_path() {
    let out = run(&["check-rates", "--input", "fixture:contact_path4", "--expect", "attractive,additive-births,constant-deaths"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for p in ["attractive", "additive-births", "constant-deaths"] {
        assert_eq!(verdict(&v, p), "holds");
    }
}

#[test]
fn evolve_at_zero_echoes_input() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    fs::write(&m, r#"{"weights": ["1", "2", "3", "4"]}"#).unwrap();
    let sys = dir.path().join("s.json");
    fs::write(&sys, r#"{"model": "contact", "edges": [[0, 1]], "lambda": "1", "delta": "1/2"}"#).unwrap();
    let out = run(&["evolve", "--input", sys.to_str().unwrap(), "--measure", m.to_str().unwrap(), "--t", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let evolved = &v["report"]["evolved"];
    assert_eq!(evolved[0]["measure"]["weights"], serde_json::json!(["1/10", "1/5", "3/10", "2/5"]));
    assert_eq!(evolved[1]["measure"]["mode"], "float");
    let total: f64 = evolved[1]["measure"]["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn classify3_epsilon_measures() {
    let out = run(&["classify3", "--input", "fixture:eps_dca_not_lattice", "--expect", "dca,associated"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["verdicts"]["lattice"], false);
    let out = run(&["classify3", "--input", "fixture:eps_associated_not_downward", "--expect", "downward-fkg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn search_finds_violation_and_reports_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["search", "--input", "fixture:nonattractive2", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let written = fs::read_to_string(&path).unwrap();
    assert_eq!(written.as_bytes(), out.stdout.as_slice());
    let outcome: spincorr::harness::SearchOutcome =
        serde_json::from_value(json(&out)["report"].clone()).expect("report re-parses");
    assert!(outcome.reverify().unwrap());
}

#[test]
fn verify_theorem_on_contact_path() {
    let out = run(&["verify-theorem", "--input", "fixture:experiment_contact_downward"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["summary"]["status"], "all-hold");
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"weights\": [1, 2,\n").unwrap();
    let out = run(&["check-measure", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    assert_eq!(run(&["check-measure", "--input", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["check-measure"]).status.code(), Some(2));
    assert_eq!(run(&["check-measure", "--input", "fixture:derangement3", "--expect", "bogus"]).status.code(), Some(2));
}

#[test]
fn six_sites_need_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m6.json");
    let weights: Vec<String> = (0..64).map(|_| "1".to_string()).collect();
    fs::write(&m, serde_json::json!({ "weights": weights }).to_string()).unwrap();
    assert_eq!(run(&["check-measure", "--input", m.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn fixtures_listing_and_markdown() {
    let out = run(&["fixtures"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["report"]["fixtures"].as_array().unwrap().len() >= 10);
    let text = run(&["fixtures", "contact_path4"]);
    let v: Value = serde_json::from_slice(&text.stdout).unwrap();
    assert_eq!(v["model"], "contact");
    let md = run(&["check-measure", "--input", "fixture:derangement3", "--format", "markdown"]);
    assert!(String::from_utf8(md.stdout).unwrap().contains("| lattice | ✗ fails"));
}
