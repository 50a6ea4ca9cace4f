//! Reruns of the same (config, seed) pair must produce byte-identical result
//! files regardless of how many worker threads the process uses. Timing
//! sidecars (`timing*.csv`) are the only wall-clock-dependent files and are
//! exempt.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qualign-cli"))
}

const SCENARIO: &str = r#"
version = 1

[instance]
sequences = ["AG", "CG"]
padded_len = 2

[ansatz]
kind = "hea"
layers = 2

[optimizer]
method = "spsa"
shots = 256
iterations = 5

[cvar]
r0 = 0.5
warmup = 2
r_final = 1.0

[seeds]
list = [11, 12, 13]

[output]
directory = "results"
"#;

/// Every file under `root`, keyed by path relative to it.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn is_timing_sidecar(rel: &str) -> bool {
    Path::new(rel)
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with("timing") && n.ends_with(".csv"))
}

fn assert_identical_results(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) {
    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "runs produced different file sets"
    );
    for (rel, bytes) in a {
        if is_timing_sidecar(rel) {
            continue;
        }
        assert_eq!(bytes, &b[rel], "file {rel} differs between runs");
    }
}

fn run_once(threads: &str) -> BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.toml");
    std::fs::write(&config, SCENARIO).unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&config)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    snapshot(&dir.path().join("results"))
}

#[test]
fn rerun_is_byte_identical() {
    let first = run_once("2");
    let second = run_once("2");
    assert_identical_results(&first, &second);
}

#[test]
fn worker_count_does_not_change_results() {
    let single = run_once("1");
    let several = run_once("3");
    assert_identical_results(&single, &several);
}

#[test]
fn study_rerun_is_byte_identical() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("scenario.toml");
        std::fs::write(&config, SCENARIO.replace("list = [11, 12, 13]", "list = [11]")).unwrap();
        let out = bin()
            .arg("study")
            .arg("noise-compare")
            .arg("--config")
            .arg(&config)
            .arg("--out-dir")
            .arg(dir.path().join("study"))
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        snapshot(&dir.path().join("study"))
    };
    assert_identical_results(&run("1"), &run("2"));
}
