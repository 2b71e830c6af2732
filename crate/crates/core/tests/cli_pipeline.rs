mod common;

use std::fs;

#[test]
fn pipeline_outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = common::cli_pipeline(a.path());
    let second = common::cli_pipeline(b.path());
    let names: Vec<&String> = first.keys().collect();
    for expected in [
        "metrics-text-sc.json",
        "metrics-text-only.json",
        "clusters-text-sc.txt",
        "clusters-text-only.txt",
        "report.json",
    ] {
        assert!(
            first.contains_key(expected),
            "missing {expected} in {names:?}"
        );
    }
    for (name, bytes) in &first {
        assert!(bytes == &second[name], "{name} differs between runs");
    }
    let report: serde_json::Value = serde_json::from_slice(&first["report.json"]).unwrap();
    assert!(report.is_object());
}

#[test]
fn synth_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, common::SMALL_RUN_TOML).unwrap();
    let read = |sub: &str| fs::read(dir.path().join(sub).join("corpus.jsonl")).unwrap();
    common::mmhate(&dir.path().join("a"), &config, &["synth"]);
    common::mmhate(&dir.path().join("b"), &config, &["synth"]);
    common::mmhate(&dir.path().join("c"), &config, &["synth", "--seed", "4"]);
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let manifest: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("a").join("manifest-synth.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "synth");
    assert!(manifest["artifacts"]["corpus.jsonl"].is_string());
}

#[test]
fn runtime_error_is_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_mmhate"))
        .args(["train", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string() && err["message"].is_string());
}
