use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subposet")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or_else(|e| {
        panic!("bad json ({e}) from {args:?}: {text}\n{}", String::from_utf8_lossy(&out.stderr))
    });
    (code, v)
}

#[test]
fn analyze_fork() {
    let (code, v) = json(&["poset", "analyze", "--file", &data("v2.json"), "--k", "2"]);
    assert_eq!(code, 0);
    let row = &v["rows"][0];
    assert_eq!(row["height"], 2);
    assert_eq!(row["tree"], true);
    assert_eq!(row["saturated"], true);
    assert_eq!(v["config"]["seed"], 0);
    assert!(v["version"].is_string());
}

#[test]
fn analyze_butterfly_is_not_tree() {
    let (_, v) = json(&["poset", "analyze", "--file", &data("butterfly.json"), "--k", "2"]);
    assert_eq!(v["rows"][0]["tree"], false);
}

#[test]
fn decompose_fork_one_step() {
    let (code, v) = json(&["poset", "decompose", "--file", &data("v2.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["steps"], 1);
    assert_eq!(v["summary"]["final_chain_length"], 2);
}

#[test]
fn saturate_adds_one_element() {
    let (code, v) = json(&["poset", "saturate", "--file", &data("y.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["rows"][0]["added"], 1);
}

#[test]
fn saturate_rejects_non_tree() {
    let out = run(&["poset", "saturate", "--file", &data("butterfly.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tree"));
}

#[test]
fn verify_marked_chains_all_match() {
    let (code, v) = json(&["verify", "2.3", "--n", "5", "--k", "2", "--families", "100", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["identity_matches"], 100);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn verify_zone_large_n() {
    let (code, v) = json(&["verify", "3.1", "--n", "2048", "--s", "3", "--trials", "10000", "--seed", "7", "--instances", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["respected"], 3);
}

#[test]
fn verify_nested_structure_passes() {
    let (code, v) = json(&["verify", "5.1", "--n", "4", "--k", "2", "--h", "2", "--epsilon", "1/2", "--sparse-pools", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["structural_ok"], 3);
    assert!(v["rows"][0]["iterations"].is_array());
}

#[test]
fn verify_reports_are_reproducible() {
    let args = ["verify", "density", "--n", "5", "--k", "2", "--families", "15", "--seed", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn la_chain3_weak() {
    let (code, v) = json(&["extremal", "la", "--n", "4", "--poset", "chain3", "--weak"]);
    assert_eq!(code, 0);
    assert_eq!(v["rows"][0]["value"], 10);
    assert_eq!(v["rows"][0]["induced"], false);
}

#[test]
fn embed_fork_in_middle_levels() {
    let (code, v) = json(&["extremal", "embed", "--n", "12", "--poset", "v2", "--family", "middle:2", "--oracle"]);
    assert_eq!(code, 0);
    let row = &v["rows"][0];
    assert_eq!(row["verdict"], "found");
    assert_eq!(row["oracle_verdict"], "found");
    assert_eq!(row["embedding"].as_array().unwrap().len(), 3);
}

#[test]
fn check_exit_codes() {
    let (code, v) = json(&["extremal", "check", "--n", "8", "--poset", "chain3", "--levels", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["rows"][0]["avoided"], true);
    let (code, v) = json(&["extremal", "check", "--n", "8", "--poset", "chain3", "--levels", "3"]);
    assert_eq!(code, 1);
    assert_eq!(v["rows"][0]["avoided"], false);
}

#[test]
fn exhausted_budget_is_indeterminate() {
    let (code, v) = json(&["extremal", "check", "--n", "10", "--poset", "hm4", "--levels", "3", "--node-limit", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["rows"][0]["verdict"], "indeterminate");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "9.9"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "density", "--n", "4", "--epsilon", "x"]).status.code(), Some(2));
    assert_eq!(run(&["extremal", "la", "--n", "12", "--poset", "chain2"]).status.code(), Some(2));
    assert_eq!(run(&["extremal", "la", "--n", "3", "--poset", "tree"]).status.code(), Some(2));
}

#[test]
fn csv_output() {
    let out = run(&["verify", "marked-chains", "--n", "3", "--families", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# subposet"));
    assert!(lines.next().unwrap().contains("lym_consistent"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn construct_writes_family() {
    let dir = std::env::temp_dir().join(format!("subposet-construct-{}", std::process::id()));
    let (code, v) = json(&["extremal", "construct", "--n", "6", "--levels", "2", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["rows"][0]["size"], 35);
    let text = std::fs::read_to_string(&dir).unwrap();
    std::fs::remove_file(&dir).ok();
    assert!(text.starts_with("{\"n\":6"));
}
