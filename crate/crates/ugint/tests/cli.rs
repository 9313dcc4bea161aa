//! End-to-end checks of the command-line contract: record contents,
//! exit codes, determinism, and the pinned golden record.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ugint"))
        .args(args)
        .current_dir(manifest_dir())
        .env_remove("UGI_SEED")
        .output()
        .expect("spawn ugint")
}

fn record(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("record parses as JSON")
}

fn write_matrix(path: &Path, rows: usize, cols: usize, entries: &[(f64, f64)]) {
    let data: Vec<Vec<[f64; 2]>> = (0..rows)
        .map(|i| (0..cols).map(|j| [entries[i * cols + j].0, entries[i * cols + j].1]).collect())
        .collect();
    let doc = serde_json::json!({"rows": rows, "cols": cols, "data": data});
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ugint-cli-{}-{}", tag, std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn eval_i1_zero_b_is_one() {
    let dir = scratch_dir("zerob");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    write_matrix(&a, 2, 2, &[(0.3, 0.1), (0.2, -0.4), (0.0, 0.5), (0.1, 0.0)]);
    write_matrix(&b, 2, 2, &[(0.0, 0.0); 4]);
    let rec = record(&run(&["eval", "i1", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]));
    assert_eq!(rec["value"], serde_json::json!([1.0, 0.0]));
    assert_eq!(rec["status"], "ok");
}

#[test]
fn eval_i3_hermitian_is_real() {
    let dir = scratch_dir("herm");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    write_matrix(&a, 2, 2, &[(0.4, 0.0), (0.1, 0.2), (0.1, -0.2), (-0.3, 0.0)]);
    write_matrix(&b, 2, 2, &[(-0.2, 0.0), (0.3, -0.1), (0.3, 0.1), (0.5, 0.0)]);
    let rec = record(&run(&["eval", "i3", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]));
    assert!(rec["value"][1].as_f64().unwrap().abs() < 1e-10);
    assert_eq!(rec["status"], "ok");
}

#[test]
fn eval_i1_matches_pinned_golden_record() {
    let out = run(&["eval", "i1", "--a", "tests/data/a.json", "--b", "tests/data/b.json", "--nu", "1"]);
    assert!(out.status.success());
    let golden = std::fs::read(manifest_dir().join("tests/data/golden_i1.json")).unwrap();
    assert_eq!(out.stdout, golden, "record drifted from the pinned golden file");
}

#[test]
fn oracle_mc_at_zero_has_zero_stderr() {
    let dir = scratch_dir("mczero");
    let z = dir.join("z.json");
    write_matrix(&z, 2, 2, &[(0.0, 0.0); 4]);
    let p = z.to_str().unwrap();
    let rec = record(&run(&["oracle", "i1", "mc", "--a", p, "--b", p, "--samples", "1000"]));
    assert_eq!(rec["value"], serde_json::json!([1.0, 0.0]));
    assert_eq!(rec["diagnostics"]["stderr"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn oracle_series_weight_zero_is_one() {
    let rec = record(&run(&[
        "oracle", "i1", "series", "--random", "--n", "3", "--seed", "11", "--max-weight", "0",
    ]));
    // the trivial-representation character goes through the same
    // floating-point engine, so "exactly 1" holds only to roundoff
    let re = rec["value"][0].as_f64().unwrap();
    let im = rec["value"][1].as_f64().unwrap();
    assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12, "value {:?}", rec["value"]);
}

#[test]
fn same_seed_gives_identical_records() {
    let args = ["oracle", "i2", "mc", "--random", "--n", "2", "--nu", "1", "--seed", "21", "--samples", "20000"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn seed_defaults_to_environment_variable() {
    let explicit = run(&["oracle", "i1", "mc", "--random", "--n", "2", "--seed", "33", "--samples", "5000"]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_ugint"))
        .args(["oracle", "i1", "mc", "--random", "--n", "2", "--samples", "5000"])
        .current_dir(manifest_dir())
        .env("UGI_SEED", "33")
        .output()
        .unwrap();
    assert!(via_env.status.success());
    let a: Value = serde_json::from_slice(&explicit.stdout).unwrap();
    let b: Value = serde_json::from_slice(&via_env.stdout).unwrap();
    assert_eq!(a["value"], b["value"]);
    assert_eq!(b["diagnostics"]["seed"], serde_json::json!(33));
}

#[test]
fn out_flag_duplicates_stdout_bytes() {
    let dir = scratch_dir("out");
    let path = dir.join("record.json");
    let out = run(&[
        "eval", "i1", "--random", "--n", "2", "--seed", "5", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}

#[test]
fn rect_record_carries_conjecture_marker() {
    let rec = record(&run(&["eval", "i2rect", "--random", "--n", "3", "--m", "2", "--seed", "9"]));
    assert_eq!(rec["diagnostics"]["conjecture"], serde_json::json!(true));
}

#[test]
fn exit_code_contract() {
    // usage: unknown subcommand, missing required matrix, bad flag value
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "i2", "--a", "tests/data/a.json"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "i1", "--random"]).status.code(), Some(1));
    assert_eq!(run(&["oracle", "i3", "series", "--random", "--n", "2"]).status.code(), Some(1));

    // malformed or mismatched input files
    let dir = scratch_dir("exit");
    let garbage = dir.join("garbage.json");
    std::fs::write(&garbage, b"not json").unwrap();
    let g = garbage.to_str().unwrap();
    assert_eq!(run(&["eval", "i1", "--a", g, "--b", g]).status.code(), Some(2));
    let small = dir.join("small.json");
    let big = dir.join("big.json");
    write_matrix(&small, 1, 1, &[(0.5, 0.0)]);
    write_matrix(&big, 2, 2, &[(0.5, 0.0); 4]);
    let mismatched = run(&[
        "verify", "i1", "--a", small.to_str().unwrap(), "--b", big.to_str().unwrap(),
    ]);
    assert_eq!(mismatched.status.code(), Some(2));
    assert_eq!(run(&["eval", "i1", "--a", "no-such-file.json", "--b", g]).status.code(), Some(2));

    // numerical failure: spectrum outside the series convergence domain
    let huge = dir.join("huge.json");
    write_matrix(&huge, 1, 1, &[(100.0, 0.0)]);
    let h = huge.to_str().unwrap();
    assert_eq!(run(&["eval", "i3", "--a", h, "--b", h]).status.code(), Some(3));
}
