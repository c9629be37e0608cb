//! End-to-end runs of the `gaudin-forge` binary on the shipped configs.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use sha2::{Digest, Sha256};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], threads: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gaudin-forge"))
        .args(args)
        .env("GAUDIN_FORGE_THREADS", threads)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn manifest_hashes_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("levels.toml");
    let out = run(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], "1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["schema_version"], 1);
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() >= 2);
    for f in files {
        let bytes = std::fs::read(dir.path().join(f["file"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let csv = std::fs::read_to_string(dir.path().join("levels.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with('m'), "{header}");
    assert!(csv.contains("\r\n"));
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let cfg = config("theta_flow.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let out = run(
            &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--mode", "calibrated"],
            threads,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["manifest.json", "theta_flow.csv", "theta_flow.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let summary = read_json(&a.path().join("theta_flow.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["status"], "ok");
}

#[test]
fn seed_flag_overrides_config() {
    let cfg = config("evolve.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ["--config", cfg.to_str().unwrap(), "--out"];
    let r1 = run(&[&base[..], &[a.path().to_str().unwrap(), "--seed", "11"]].concat(), "1");
    let r2 = run(&[&base[..], &[b.path().to_str().unwrap()]].concat(), "1");
    assert!(r1.status.success() && r2.status.success());
    assert_eq!(read_json(&a.path().join("evolve.json"))["seed"], 11);
    assert_ne!(
        std::fs::read(a.path().join("evolve.csv")).unwrap(),
        std::fs::read(b.path().join("evolve.csv")).unwrap()
    );
}

#[test]
fn bad_config_writes_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "task = \"evolve\"\nbogus = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(2));
    let err = read_json(&out_dir.join("error.json"));
    assert_eq!(err["schema_version"], 1);
    assert_eq!(err["status"], "error");
    assert!(err["error"]["message"].as_str().unwrap().contains("bogus"));
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn unknown_mode_is_rejected() {
    let cfg = config("theta_flow.toml");
    let out = run(&["--config", cfg.to_str().unwrap(), "--mode", "fast"], "1");
    assert!(!out.status.success());
}
