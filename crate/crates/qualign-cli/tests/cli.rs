//! End-to-end checks of the compiled binary: exit codes, the machine-readable
//! error record on stderr, format selection, and the on-disk artifact set for
//! each verb.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qualign-cli"))
}

/// A 4-qubit scenario small enough that every test stays in the millisecond
/// range: two 2-letter sequences over 2 columns, two seeds, two iterations.
const TINY: &str = r#"
version = 1

[instance]
sequences = ["AG", "AG"]
padded_len = 2

[ansatz]
kind = "hea"
layers = 1

[optimizer]
method = "parameter-shift"
shots = 64
iterations = 2

[seeds]
list = [1, 2]

[output]
directory = "results"
"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr_error_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .find(|l| l.trim_start().starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON error record on stderr: {text}"));
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr not JSON ({e}): {text}"))
}

#[test]
fn run_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let out = bin().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let results = dir.path().join("results");
    for name in [
        "resolved.toml",
        "summary.json",
        "summary.csv",
        "histogram_pooled.json",
        "histogram_pooled.csv",
        "histogram_seed1.json",
        "histogram_seed2.csv",
        "trace_seed1.jsonl",
        "trace_seed2.csv",
        "timing.csv",
    ] {
        assert!(results.join(name).exists(), "missing artifact {name}");
    }

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean final energy"), "stdout: {stdout}");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(results.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 2);
    assert_eq!(summary["config"]["version"], 1);
}

#[test]
fn unknown_key_is_rejected_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &format!("{TINY}\ntypo_section = 3\n"));
    let out = bin().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(!out.status.success());
    let record = stderr_error_record(&out);
    let message = record["error"]["message"].as_str().unwrap();
    assert!(message.contains("typo_section"), "message: {message}");
    // Nothing may be written when validation fails.
    assert!(!dir.path().join("results").exists());
}

#[test]
fn field_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY.replace("kind = \"hea\"", "kind = \"qaoa\"");
    let config = write_config(dir.path(), &body);
    let out = bin().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(!out.status.success(), "qaoa + parameter-shift must be rejected");
    let record = stderr_error_record(&out);
    let message = record["error"]["message"].as_str().unwrap();
    assert!(message.contains("optimizer.method"), "message: {message}");
}

#[test]
fn missing_config_file_reports_io_error() {
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg("/nonexistent/scenario.toml")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let record = stderr_error_record(&out);
    assert!(record["error"]["kind"].is_string());
}

#[test]
fn format_flag_limits_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&config)
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    assert!(out.status.success());
    let results = dir.path().join("results");
    assert!(results.join("summary.json").exists());
    assert!(!results.join("summary.csv").exists());
    assert!(!results.join("histogram_pooled.csv").exists());
    // The timing sidecar is not a result artifact and is always written.
    assert!(results.join("timing.csv").exists());
}

#[test]
fn seed_override_replaces_file_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&config)
        .arg("--seed")
        .arg("7")
        .arg("--seed")
        .arg("9")
        .output()
        .unwrap();
    assert!(out.status.success());
    let results = dir.path().join("results");
    assert!(results.join("histogram_seed7.json").exists());
    assert!(results.join("histogram_seed9.json").exists());
    assert!(!results.join("histogram_seed1.json").exists());
}

#[test]
fn duplicate_seeds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY.replace("list = [1, 2]", "list = [3, 3]");
    let config = write_config(dir.path(), &body);
    let out = bin().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(!out.status.success());
    let record = stderr_error_record(&out);
    let message = record["error"]["message"].as_str().unwrap();
    assert!(message.contains("seeds"), "message: {message}");
}

#[test]
fn oracle_verb_writes_minima() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let out = bin()
        .arg("oracle")
        .arg("--config")
        .arg(&config)
        .arg("--out-dir")
        .arg(dir.path().join("oracle"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let minima: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("oracle").join("minima.json")).unwrap(),
    )
    .unwrap();
    assert!(minima["global_energy"].is_number());
    assert!(!minima["global_states"].as_array().unwrap().is_empty());

    let csv = std::fs::read_to_string(dir.path().join("oracle").join("minima.csv")).unwrap();
    assert!(csv.starts_with("kind,bitstring,energy"), "csv: {csv}");
    assert!(csv.contains("global,"));
}

#[test]
fn study_verb_builds_named_arm_trees() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY.replace("list = [1, 2]", "list = [1]");
    let config = write_config(dir.path(), &body);
    let out = bin()
        .arg("study")
        .arg("noise-compare")
        .arg("--config")
        .arg(&config)
        .arg("--out-dir")
        .arg(dir.path().join("study"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let root = dir.path().join("study");
    for arm in ["noiseless", "noisy", "noiseless-spsa"] {
        assert!(root.join(arm).join("summary.json").exists(), "missing arm {arm}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("study_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["kind"], "noise-compare");
    assert_eq!(summary["arms"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_study_kind_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let out = bin()
        .arg("study")
        .arg("mystery")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let record = stderr_error_record(&out);
    let message = record["error"]["message"].as_str().unwrap();
    assert!(message.contains("entanglement-sweep"), "message: {message}");
}
