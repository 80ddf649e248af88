//! End-to-end exercises of the command-line interface: file formats, exit
//! codes, and report fields for each subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fockmodel")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("FOCKMODEL_DEFAULT_TOL")
        .output()
        .expect("binary runs")
}

fn machine_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("machine report is JSON")
}

const TUPLE_HALF: &str = r#"{"format_version":1,"n":1,"d":1,"matrices":[[[0.5,0.0]]]}"#;
const TUPLE_PAIR: &str =
    r#"{"format_version":1,"n":2,"d":1,"matrices":[[[0.5,0.0]],[[0.5,0.0]]]}"#;
const TUPLE_COISO: &str = r#"{"format_version":1,"n":2,"d":1,"matrices":[[[0.7071067811865476,0.0]],[[0.7071067811865476,0.0]]]}"#;
/// Nilpotent n=2, d=2 tuple used across the factorization commands.
const TUPLE_NIL: &str = r#"{"format_version":1,"n":2,"d":2,"matrices":[[[0,0],[0.6,0],[0,0],[0,0]],[[0,0],[0.5,0],[0,0],[0,0]]]}"#;
const SUBSPACE_E1: &str = r#"{"format_version":1,"ambient_dim":2,"dim":1,"basis":[[1.0,0.0],[0.0,0.0]]}"#;
/// T = X diag(i,-i) X^{-1} with X = [[1,1],[0,1]].
const TUPLE_ROT: &str = r#"{"format_version":1,"n":1,"d":2,"matrices":[[[0.0,1.0],[0.0,-2.0],[0.0,0.0],[0.0,-1.0]]]}"#;

#[test]
fn validate_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_COISO);
    let out = run(&["validate", tuple.to_str().unwrap(), "--format", "machine"]);
    assert!(out.status.success());
    let v = machine_json(&out);
    assert_eq!(v["results"]["row_contraction"], serde_json::json!(true));

    let out = run(&["classify", tuple.to_str().unwrap(), "--format", "machine"]);
    assert!(out.status.success());
    let v = machine_json(&out);
    assert_eq!(v["results"]["coisometric"], serde_json::json!(true));
    assert_eq!(v["results"]["cnc"], serde_json::json!(false));
}

#[test]
fn classify_pure_pair() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_PAIR);
    let out = run(&["classify", tuple.to_str().unwrap(), "--format", "machine"]);
    assert!(out.status.success());
    let v = machine_json(&out);
    assert_eq!(v["results"]["pure_c0"], serde_json::json!(true));
    assert_eq!(v["results"]["cnc"], serde_json::json!(true));
}

#[test]
fn charfn_matches_scalar_family() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_HALF);
    let out = run(&[
        "charfn",
        tuple.to_str().unwrap(),
        "--deg",
        "6",
        "--format",
        "machine",
    ]);
    assert!(out.status.success());
    let v = machine_json(&out);
    let coeffs = v["results"]["coefficients"]["coeffs"].as_array().unwrap();
    // Fix the overall defect-basis sign by the degree-0 value.
    let c0 = coeffs
        .iter()
        .find(|c| c["word"] == "g0")
        .and_then(|c| c["matrix"][0][0].as_f64())
        .unwrap();
    let sgn = if c0 < 0.0 { 1.0 } else { -1.0 };
    assert!((sgn * c0 + 0.5).abs() < 1e-12);
    for (word, expect) in [("g1", 0.75), ("g1.g1", 0.375), ("g1.g1.g1", 0.1875)] {
        let got = coeffs
            .iter()
            .find(|c| c["word"] == word)
            .and_then(|c| c["matrix"][0][0].as_f64())
            .unwrap();
        assert!((sgn * got - expect).abs() < 1e-12, "{word}: {got}");
    }
}

#[test]
fn dilate_wold_model_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_NIL);
    let out = run(&["dilate", tuple.to_str().unwrap(), "-N", "4", "--format", "machine"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = machine_json(&out);
    assert_eq!(v["results"]["exact"], serde_json::json!(true));

    let out = run(&["wold", tuple.to_str().unwrap(), "-N", "4", "--format", "machine"]);
    assert!(out.status.success());
    let v = machine_json(&out);
    assert_eq!(v["results"]["residual_dim"], serde_json::json!(0));

    let out = run(&["model", tuple.to_str().unwrap(), "-N", "4", "--format", "machine"]);
    assert!(out.status.success());
    let v = machine_json(&out);
    let res = v["results"]["moment_residual"].as_f64().unwrap();
    assert!(res < 1e-8);
}

#[test]
fn model_rejects_non_cnc_input() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_COISO);
    let out = run(&["model", tuple.to_str().unwrap(), "-N", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invariant_to_factor_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_NIL);
    let sub = write(dir.path(), "s.json", SUBSPACE_E1);
    let out = run(&[
        "invariant-to-factor",
        tuple.to_str().unwrap(),
        sub.to_str().unwrap(),
        "-N",
        "4",
        "--format",
        "machine",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = machine_json(&out);
    assert_eq!(v["results"]["regular"], serde_json::json!(true));
    assert!(v["results"]["round_trip_distance"].as_f64().unwrap() < 1e-6);

    // Feed the emitted factors back through factorize-check and
    // factor-to-invariant.
    let theta1 = write(
        dir.path(),
        "theta1.json",
        &serde_json::to_string(&v["results"]["theta1"]).unwrap(),
    );
    let theta2 = write(
        dir.path(),
        "theta2.json",
        &serde_json::to_string(&v["results"]["theta2"]).unwrap(),
    );
    let out = run(&[
        "factorize-check",
        theta1.to_str().unwrap(),
        theta2.to_str().unwrap(),
        "-N",
        "3",
        "--format",
        "machine",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = machine_json(&out);
    assert_eq!(v["results"]["regular"], serde_json::json!(true));

    let out = run(&[
        "factor-to-invariant",
        theta1.to_str().unwrap(),
        theta2.to_str().unwrap(),
        "-N",
        "3",
        "--emit-bases",
        "--format",
        "machine",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = machine_json(&out);
    assert!(v["results"]["dim_h1_bold"].as_u64().unwrap() > 0);
    assert!(v["results"]["invariance_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn inner_outer_on_dump() {
    let dir = tempfile::tempdir().unwrap();
    // theta = 0.5 * z on C -> C: inner factor the shift, outer the constant.
    let dump = r#"{"format_version":1,"n":1,"dim_in":1,"dim_out":1,"deg":1,
        "coeffs":[{"word":"g1","matrix":[[0.5,0.0]]}]}"#;
    let theta = write(dir.path(), "theta.json", dump);
    let out = run(&[
        "inner-outer",
        theta.to_str().unwrap(),
        "-N",
        "8",
        "--format",
        "machine",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = machine_json(&out);
    assert_eq!(v["results"]["wandering_dim"], serde_json::json!(1));
    assert!(v["results"]["product_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn similarity_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(dir.path(), "pair.json", TUPLE_PAIR);
    let out = run(&["similarity", pair.to_str().unwrap(), "--format", "machine"]);
    assert!(out.status.success());
    let v = machine_json(&out);
    assert_eq!(v["results"]["similar"], serde_json::json!(false));
    assert_eq!(v["results"]["obstruction"], serde_json::json!("injectivity"));

    let rot = write(dir.path(), "rot.json", TUPLE_ROT);
    let out = run(&[
        "similarity",
        rot.to_str().unwrap(),
        "--horizon",
        "4096",
        "--format",
        "machine",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = machine_json(&out);
    assert_eq!(v["results"]["similar"], serde_json::json!(true));
}

#[test]
fn parse_errors_exit_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"format_version\":1,\n  \"n\": oops}");
    let out = run(&["classify", bad.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(out.status.code(), Some(1));
    let v = machine_json(&out);
    let msg = v["results"]["error"].as_str().unwrap();
    assert!(msg.contains("line 2"), "{msg}");
}

#[test]
fn env_var_default_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_HALF);
    let out = Command::new(bin())
        .args(["classify", tuple.to_str().unwrap(), "--format", "machine"])
        .env("FOCKMODEL_DEFAULT_TOL", "1e-6")
        .output()
        .unwrap();
    let v = machine_json(&out);
    assert_eq!(v["parameters"]["eq_tol"], serde_json::json!(1e-6));
}

#[test]
fn machine_reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_NIL);
    let strip_wall_time = |out: &Output| -> String {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .filter(|l| !l.contains("wall_time_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    for cmd in ["classify", "charfn", "dilate", "wold"] {
        let a = run(&[cmd, tuple.to_str().unwrap(), "-N", "4", "--format", "machine"]);
        let b = run(&[cmd, tuple.to_str().unwrap(), "-N", "4", "--format", "machine"]);
        assert!(a.status.success());
        assert_eq!(strip_wall_time(&a), strip_wall_time(&b), "command {cmd}");
    }
}

#[test]
fn report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = write(dir.path(), "t.json", TUPLE_HALF);
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "classify",
        tuple.to_str().unwrap(),
        "--format",
        "machine",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let contents = std::fs::read_to_string(&out_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&contents).unwrap();
    assert_eq!(v["command"], serde_json::json!("classify"));
}
