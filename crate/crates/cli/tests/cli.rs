//! End-to-end runs of the `scompress` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scompress")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn corpus(dir: &Path) {
    json(&run(dir, &["corpus", "--out-dir", "c"]));
}

#[test]
fn corpus_and_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let index = json(&run(dir.path(), &["corpus", "--out-dir", "c"]));
    assert_eq!(index.as_array().unwrap().len(), 9);
    assert!(dir.path().join("c/twinFromPartial_treePartial_3_8.perturb.json").exists());
    let vc = json(&run(dir.path(), &["dim", "--class", "c/thresholds_10_0.json", "--which", "vc"]));
    assert_eq!(vc["value"], 1);
    assert_eq!(vc["exhaustive"], true);
    let ld = json(&run(dir.path(), &["dim", "--class", "c/thresholds_10_0.json", "--which", "littlestone"]));
    assert_eq!(ld["value"], 3);
    let partial = json(&run(dir.path(), &["dim", "--class", "c/treePartial_3_7.json", "--which", "partial"]));
    assert_eq!(partial["value"], 1);
    assert_eq!(run(dir.path(), &["dim", "--class", "c/treePartial_3_7.json", "--which", "vc"]).status.code(), Some(2));
}

#[test]
fn compress_keeps_a_single_pair() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    std::fs::write(dir.path().join("s.json"), r#"[["2",1],["7",0]]"#).unwrap();
    let out = json(&run(dir.path(), &["compress", "--class", "c/thresholds_10_0.json", "--scheme", "proper", "--sample", "s.json"]));
    assert_eq!(out["kept"], serde_json::json!([["2", 1]]));
    assert_eq!(out["size"], 1);
}

#[test]
fn reductions_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    std::fs::write(dir.path().join("ss.json"), r#"[[["0",1],["5",0]],[["2",1]]]"#).unwrap();
    std::fs::write(dir.path().join("u.json"), r#"{"0":["0","1"],"5":["5","6"]}"#).unwrap();
    for mode in ["general", "proper-majority"] {
        let rows = json(&run(dir.path(), &["reduce", "multiclass", "--class", "c/thresholds_10_0.json", "--mode", mode, "--samples", "ss.json"]));
        assert!(rows.as_array().unwrap().iter().all(|r| r["consistent"] == true && r["bound_ok"] == true));
    }
    let rows = json(&run(
        dir.path(),
        &["reduce", "robust", "--class", "c/thresholds_10_0.json", "--perturb", "u.json", "--substrate", "threshold", "--mode", "stable", "--samples", "ss.json"],
    ));
    assert!(rows.as_array().unwrap().iter().all(|r| r["consistent"] == true && r["bound_ok"] == true));
    std::fs::write(dir.path().join("rs.json"), r#"[["0","1/2"],["1","0"],["3","0"]]"#).unwrap();
    for mode in ["linf", "lp", "majority", "exact", "agnostic"] {
        let rows = json(&run(dir.path(), &["reduce", "regression", "--class", "c/stepReal_6_4_5.json", "--mode", mode, "--eps", "1/16", "--samples", "rs.json"]));
        assert_eq!(rows[0]["bound_ok"], true, "{mode}");
    }
}

#[test]
fn one_inclusion_prediction() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    std::fs::write(dir.path().join("s.json"), r#"[["v0",0],["v1",0]]"#).unwrap();
    let twin = "c/twinFromPartial_treePartial_3_8";
    let out = json(&run(
        dir.path(),
        &["oig", "--class", &format!("{twin}.json"), "--perturb", &format!("{twin}.perturb.json"), "--sample", "s.json", "--test-point", "v3'"],
    ));
    assert_eq!(out["acyclic"], true);
    assert!(out["maxOutDegree"].as_u64().unwrap() <= 1);
}

#[test]
fn suites_write_reports_and_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(dir.path(), &["--jobs", "2", "suite", "dims-identities", "--out-dir", "rep"]);
    assert!(ok.status.success());
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let csv = std::fs::read_to_string(dir.path().join("rep/dims-identities.csv")).unwrap();
    assert!(csv.starts_with("class,scheme,sample,size,loss,bound_ok,stable_ok,vc,graph,pseudo,littlestone,wall_time_ms"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep/dims-identities.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);

    let bad = run(dir.path(), &["suite", "stability", "--inject", "unstable", "--out-dir", "rep"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("witness"));
}
