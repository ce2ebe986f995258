//! The `corrgeo` binary: exit codes, diagnostics and file formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn corrgeo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrgeo"))
        .current_dir(dir)
        .env_remove("CORRGEO_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = corrgeo(dir.path(), &["synth", "--preset", "group-effect", "--n", "6", "--m-per-group", "6", "-o", "ge"]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

#[test]
fn dist_of_identical_files_is_zero() {
    let dir = setup();
    let o = corrgeo(dir.path(), &["dist", "ge/matrices/sub-0000.csv", "ge/matrices/sub-0000.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.0\n");
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = corrgeo(dir.path(), &["dist", "--frobnicate", "a.csv", "b.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage:"));
    assert_eq!(corrgeo(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn bgtest_is_reproducible() {
    let dir = setup();
    let args = ["bgtest", "ge/manifest.csv", "--n-perm", "200", "--seed", "9"];
    let (a, b) = (corrgeo(dir.path(), &args), corrgeo(dir.path(), &args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["command"], "bgtest");
    assert_eq!(report["config"]["seed"], 9);
    assert!(report["config"].get("threads").is_none());
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn validation_errors_exit_1_on_one_line() {
    let dir = setup();
    fs::write(dir.path().join("ragged.csv"), "1,0,0\n0,1\n0,0,1\n").unwrap();
    let o = corrgeo(dir.path(), &["laplacian", "ragged.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 2"));
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);

    // The group-effect cohort has no ages.
    let o = corrgeo(dir.path(), &["brainage", "ge/manifest.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: too few samples"));

    let manifest = fs::read_to_string(dir.path().join("ge/manifest.csv")).unwrap();
    let first = manifest.lines().nth(1).unwrap();
    fs::write(dir.path().join("ge/dup.csv"), format!("{manifest}{first}\n")).unwrap();
    let o = corrgeo(dir.path(), &["bgtest", "ge/dup.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("duplicate subject id"));

    assert_eq!(corrgeo(dir.path(), &["--threads", "0", "laplacian", "x.csv"]).status.code(), Some(1));
}

#[test]
fn rank_deficient_input_needs_shrink() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.csv"), "1,1,0\n1,1,0\n0,0,1\n").unwrap();
    let o = corrgeo(dir.path(), &["laplacian", "r.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = corrgeo(dir.path(), &["--shrink", "laplacian", "r.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["warnings"][0].as_str().unwrap().contains("shrunk"));
}

#[test]
fn mean_and_tangent_outputs() {
    let dir = setup();
    for metric in ["offlog", "euclidean"] {
        let o = corrgeo(dir.path(), &["mean", "--metric", metric, "ge/manifest.csv", "-o", "mean.csv"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = fs::read_to_string(dir.path().join("mean.csv")).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().all(|l| l.split(',').count() == 6));
    }
    let o = corrgeo(dir.path(), &["tangent", "--metric", "ecm", "ge/manifest.csv", "-o", "coords.csv"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("coords.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("subject_id,c1_0,c2_0,c2_1"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn threads_from_environment() {
    let dir = setup();
    let base = corrgeo(dir.path(), &["bgtest", "ge/manifest.csv", "--n-perm", "50"]);
    let env = Command::new(env!("CARGO_BIN_EXE_corrgeo"))
        .current_dir(dir.path())
        .env("CORRGEO_THREADS", "3")
        .args(["bgtest", "ge/manifest.csv", "--n-perm", "50"])
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(base.stdout, env.stdout);
}

#[test]
fn grassmann_and_laplacian_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert!(corrgeo(dir.path(), &["synth", "--preset", "subspace", "--m-per-group", "8", "-o", "sp"]).status.success());
    let o = corrgeo(dir.path(), &["grassmann", "sp/manifest.csv", "--folds", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let regions = report["result"]["regions"].as_array().unwrap();
    assert_eq!(regions.len(), 30);
    assert!(report["result"]["grassmann"]["aggregate"]["accuracy"]["mean"].is_number());

    let o = corrgeo(dir.path(), &["laplacian", "sp/matrices/sub-0000.csv", "--density", "0.2"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["result"]["eigenvalues"].as_array().unwrap().len(), 30);
    assert_eq!(report["result"]["k"], 5);
}
