use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn theta4(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theta4"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn mmatrix_genus_one_matches_hand_computation() {
    let out = theta4(&["mmatrix", "--genus", "1", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(
        v["entries"],
        serde_json::json!([[1, 1, 1], [1, 1, -1], [1, -1, 1]])
    );
    assert_eq!(v["verification"]["quadratic_identity"], true);
}

#[test]
fn mmatrix_emit_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.json");
    let out = theta4(&["mmatrix", "--genus", "2", "--emit", path(&file)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["dim"], 10);
    assert_eq!(v["entries"].as_array().unwrap().len(), 10);
}

#[test]
fn chars_lists_parities() {
    let out = theta4(&["chars", "--genus", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["d_plus"], 10);
    assert_eq!(v["d_minus"], 6);
    let odd = v["characteristics"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["parity"] == -1)
        .count();
    assert_eq!(odd, 6);
}

#[test]
fn theta_at_tau_i() {
    let tau = corpus_dir().join("tau/tau_i.json");
    let out = theta4(&["theta", "--tau", path(&tau), "--char", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let re = v["value"]["re"]
        .as_f64()
        .or_else(|| v["value"][0].as_f64())
        .unwrap();
    assert!((re - 1.086434811213308).abs() < 1e-12, "{v}");
}

#[test]
fn nulls_on_diag_ii_lists_one_vanishing() {
    let tau = corpus_dir().join("tau/diag_ii.json");
    let out = theta4(&["nulls", "--tau", path(&tau)]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["vanishing"].as_array().unwrap().len(), 1);
    assert_eq!(
        v["vanishing"][0],
        serde_json::json!({"a1": [1, 1], "a2": [1, 1]})
    );
    assert_eq!(v["nulls"].as_array().unwrap().len(), 10);
}

#[test]
fn verify_quartic_passes_on_random_tau() {
    let tau = corpus_dir().join("tau/rand_g2.json");
    let out = theta4(&[
        "verify-quartic",
        "--tau",
        path(&tau),
        "--samples",
        "20",
        "--seed",
        "1",
        "--eps",
        "1e-8",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout_json(&out).as_array().unwrap().len(), 20 * 16);
}

#[test]
fn verify_inversion_passes_on_random_tau() {
    let tau = corpus_dir().join("tau/rand_g2.json");
    let out = theta4(&["verify-inversion", "--tau", path(&tau), "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out).as_array().unwrap().len(), 5 * 10);
}

#[test]
fn basis_report_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let generic = corpus_dir().join("tau/rand_g2.json");
    let out = theta4(&[
        "basis-report",
        "--tau",
        path(&generic),
        "--out",
        path(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["theorem11_verdict"], true);
    assert_eq!(v["fourth_power_rank"], 10);

    // A vanishing null is a consistent outcome, not a failure.
    let diag = corpus_dir().join("tau/diag_ii.json");
    let out = theta4(&["basis-report", "--tau", path(&diag), "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["theorem11_verdict"], false);
    assert_eq!(v["ev_matrix_rank"], 9);
}

#[test]
fn malformed_tau_is_input_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"g": 2, "re": [[0, 0], [0, 0]], "im": [[1, 2], [2, 1]]}"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let out = theta4(&["basis-report", "--tau", path(&bad), "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());

    std::fs::write(&bad, "not json").unwrap();
    let out = theta4(&["nulls", "--tau", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));

    let corpus = dir.path().join("corpus.json");
    std::fs::write(
        &corpus,
        r#"{"entries": [{"label": "x", "tau": {"kind": "file", "path": "bad.json"}}]}"#,
    )
    .unwrap();
    let out = theta4(&[
        "run-suite",
        "--corpus",
        path(&corpus),
        "--out",
        path(&report),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(theta4(&["chars", "--genus", "7"]).status.code(), Some(2));
    assert_eq!(theta4(&["mmatrix", "--genus", "0"]).status.code(), Some(2));
    let tau = corpus_dir().join("tau/tau_i.json");
    assert_eq!(
        theta4(&["theta", "--tau", path(&tau), "--char", "10,0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        theta4(&["theta", "--tau", path(&tau), "--char", "0,0", "--eps", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn empty_corpus_passes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    std::fs::write(&corpus, r#"{"entries": []}"#).unwrap();
    let report = dir.path().join("r.json");
    let out = theta4(&[
        "run-suite",
        "--corpus",
        path(&corpus),
        "--out",
        path(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["rollup"], "pass");
}

#[test]
fn unexpected_verdict_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    std::fs::write(
        &corpus,
        r#"{"entries": [{"label": "wrong", "tau": {"kind": "diagonal", "entries": [[0, 1], [0, 1]]}}]}"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let out = theta4(&[
        "run-suite",
        "--corpus",
        path(&corpus),
        "--out",
        path(&report),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["rollup"], "fail");
}

#[test]
fn suite_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_dir().join("standard.json");
    let mut texts = Vec::new();
    for k in 0..2 {
        let report = dir.path().join(format!("r{k}.json"));
        let out = theta4(&[
            "run-suite",
            "--corpus",
            path(&corpus),
            "--out",
            path(&report),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        texts.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert!(!String::from_utf8_lossy(&texts[0]).contains("timings_ms"));

    let timed = dir.path().join("timed.json");
    let out = theta4(&[
        "run-suite",
        "--corpus",
        path(&corpus),
        "--out",
        path(&timed),
        "--timings",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&timed)
        .unwrap()
        .contains("timings_ms"));
}
