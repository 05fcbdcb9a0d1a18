//! End-to-end checks of the `topicrefine` binary: exit codes, error
//! reporting and configuration precedence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic").join(name)
}

fn topicrefine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topicrefine"))
        .args(args)
        .env_remove("TOPICREFINE_API_URL")
        .env_remove("TOPICREFINE_API_KEY")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = topicrefine(&["lda", "--bogus", "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("Usage"), "{err}");
    assert!(err.contains("error_code: usage"), "{err}");
}

#[test]
fn help_exits_zero() {
    let out = topicrefine(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("pipeline"));
}

#[test]
fn missing_corpus_file_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.txt");
    let out = topicrefine(&["lda", "--corpus", s(&missing), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.lines().any(|l| l.starts_with("error: ")), "{err}");
    assert!(err.lines().any(|l| l.starts_with("error_code: ")), "{err}");
}

#[test]
fn missing_required_input_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = topicrefine(&["lda", "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("corpus"));
}

#[test]
fn remote_backend_without_credentials_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let topics = tmp.path().join("topics.txt");
    let vocab = tmp.path().join("vocab.txt");
    std::fs::write(&topics, "alpha0 alpha1 alpha2\n").unwrap();
    std::fs::write(&vocab, "alpha0\nalpha1\nalpha2\nalpha3\n").unwrap();
    let out = topicrefine(&[
        "refine",
        "--topics",
        s(&topics),
        "--vocab",
        s(&vocab),
        "--embeddings",
        s(&fixture("embeddings.txt")),
        "--backend",
        "remote",
        "--out",
        s(&tmp.path().join("out")),
    ]);
    assert_ne!(out.status.code(), Some(0));
    let err = stderr(&out);
    assert!(err.contains("TOPICREFINE_API_URL"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 7, "lda": {"num_topics": 3, "iterations": 20, "top_n": 5}}"#).unwrap();
    let out_dir = tmp.path().join("out");
    let out = topicrefine(&[
        "lda",
        "--config",
        s(&config),
        "--corpus",
        s(&fixture("corpus.txt")),
        "--max-doc-freq-ratio",
        "1.0",
        "--k",
        "2",
        "--deterministic",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(written["seed"], 7);
    assert_eq!(written["lda"]["num_topics"], 2);
    assert_eq!(written["lda"]["iterations"], 20);
    assert_eq!(written["lda"]["top_n"], 5);
    let topics = std::fs::read_to_string(out_dir.join("topics.txt")).unwrap();
    assert_eq!(topics.lines().count(), 2);
    assert!(topics.lines().all(|l| l.split_whitespace().count() == 5));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(&config, "{not json").unwrap();
    let out = topicrefine(&["lda", "--config", s(&config), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}
