//! End-to-end CLI checks: subcommand wiring, exit codes, determinism.

use std::path::PathBuf;
use std::process::Command;

fn binary() -> PathBuf {
    let mut path = PathBuf::from(env!("CARGO_BIN_EXE_poset-lpp"));
    assert!(path.exists(), "missing {path:?}");
    path.canonicalize().unwrap_or_else(|_| std::mem::take(&mut path))
}

fn write_config(dir: &std::path::Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

const SQUARE_BOUNDS: &str = r#"{
  "poset": {"family": "lattice", "d": 2},
  "rates": {"rule": "constant", "lambda": 1.0},
  "targets": [{"down_of": [[1, 1]]}],
  "operation": "verify-bounds"
}"#;

#[test]
fn verify_bounds_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SQUARE_BOUNDS);
    let out = Command::new(binary())
        .args(["verify-bounds", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"failures\":0"), "{stdout}");
    assert!(dir.path().join("out/bounds.csv").exists());
}

#[test]
fn schema_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "poset": {"family": "lattice", "d": 2},
  "rates": {"rule": "constant", "lambda": 1.0},
  "targets": [{"down_of": [[1, 1]]}],
  "operation": "simulate",
  "mc": {"replicas": 100}
}"#,
    );
    let out = Command::new(binary())
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn budget_error_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "poset": {"family": "lattice", "d": 2},
  "rates": {"rule": "constant", "lambda": 1.0},
  "targets": [{"down_of": [[5, 5]]}],
  "operation": "oracle",
  "budgets": {"memo_entries": 1000}
}"#,
    );
    let out = Command::new(binary())
        .args(["oracle", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn mismatched_subcommand_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SQUARE_BOUNDS);
    let out = Command::new(binary())
        .args(["oracle", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn seeded_simulation_outputs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "poset": {"family": "lattice", "d": 2},
  "rates": {"rule": "constant", "lambda": 1.0},
  "targets": [{"down_of": [[2, 1]]}],
  "operation": "simulate",
  "mc": {"replicas": 20000, "seed": 123, "method": "jump-chain"}
}"#,
    );
    let mut outputs = Vec::new();
    for (sub, threads) in [("a", "1"), ("b", "4")] {
        let out_dir = dir.path().join(sub);
        let out = Command::new(binary())
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out_dir)
            .args(["--emit-samples", "--threads", threads])
            .output()
            .unwrap();
        assert!(out.status.success(), "{out:?}");
        outputs.push((
            std::fs::read(out_dir.join("simulate.json")).unwrap(),
            std::fs::read(out_dir.join("samples_0.jsonl")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}

#[test]
fn list_posets_prints_catalog() {
    let out = Command::new(binary()).arg("list-posets").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for family in ["lattice", "tree", "cone", "columnar", "custom"] {
        assert!(stdout.contains(family), "{stdout}");
    }
}
