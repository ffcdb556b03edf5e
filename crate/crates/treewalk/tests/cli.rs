//! Exit codes and output files of the `treewalk` binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::config_path;

fn treewalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treewalk"))
        .args(args)
        .output()
        .expect("run treewalk")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_accepts_the_shipped_laws() {
    for name in [
        "padic_ascending.toml",
        "padic_descending.toml",
        "padic_centered.toml",
        "lamplighter.toml",
        "oracle.toml",
    ] {
        let out = treewalk(&["validate", "--config", config_path(name).to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
    let out = treewalk(&[
        "validate",
        "--config",
        config_path("padic_ascending.toml").to_str().unwrap(),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("drift: 1/2"), "{text}");
    assert!(text.contains("E[phi^2] = 1"), "{text}");
}

#[test]
fn validate_rejects_a_horocyclic_law() {
    let out = treewalk(&["validate", "--config", config_path("horocyclic.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("contained in Hor"));
}

#[test]
fn validate_rejects_weights_that_do_not_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[realization]\nkind = padic\np = 2\n[law]\natom = affine(t = 0, a = 2) @ 1/2\natom = affine(t = 1, a = 1/2) @ 1/4\n",
    );
    let out = treewalk(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_errors_and_missing_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[realization]\nkind = padic\np = 2\n[law]\natom = affine(t = 0, a = 2) 1\n",
    );
    let out = treewalk(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    let out = treewalk(&["validate", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = treewalk(&[
        "verify",
        "--config",
        config_path("padic_ascending.toml").to_str().unwrap(),
        "--suite",
        "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_dumps_a_single_atom_walk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "single.toml",
        "[realization]\nkind = padic\np = 2\n[law]\natom = affine(t = 0, a = 2) @ 1\nallow_exceptional = true\n\
         [experiment]\ntrajectories = 1\nhorizon = 5\n",
    );
    let out_dir = dir.path().join("out");
    let run = |out: &Path| treewalk(&["simulate", "--config", &cfg, "--dump", "--out", out.to_str().unwrap()]);
    assert_eq!(run(&out_dir).status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("trajectories.csv")).unwrap();
    let heights: Vec<i64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(heights, vec![0, 1, 2, 3, 4, 5]);
    let again = dir.path().join("again");
    assert_eq!(run(&again).status.code(), Some(0));
    assert_eq!(
        std::fs::read(out_dir.join("trajectories.csv")).unwrap(),
        std::fs::read(again.join("trajectories.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(out_dir.join("report.json")).unwrap(),
        std::fs::read(again.join("report.json")).unwrap()
    );
}

#[test]
fn exceptional_laws_need_an_explicit_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "single.toml",
        "[realization]\nkind = padic\np = 2\n[law]\natom = affine(t = 0, a = 2) @ 1\n",
    );
    let out = treewalk(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_writes_report_kernel_values_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = treewalk(&[
        "verify",
        "--config",
        config_path("padic_ascending.toml").to_str().unwrap(),
        "--suite",
        "algebra,wald",
        "--seed",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["suites"].as_array().unwrap().len(), 2);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], report["config_hash"]);
    assert!(manifest["timings_ms"]["wald"].is_number());
    let csv = std::fs::read_to_string(out_dir.join("kernel_values.csv")).unwrap();
    assert!(csv.starts_with("series,n,estimate,stderr,tail_bound"));
}

#[test]
fn overrides_change_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("padic_ascending.toml");
    let hash = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let args = [
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--suite",
            "algebra",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ];
        assert_eq!(treewalk(&args).status.code(), Some(0));
        let r: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
        r["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash("1", "a"), hash("2", "b"));
}

#[test]
fn coarse_truncation_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = common::config_text("padic_ascending.toml")
        .replace("[experiment]", "[experiment]\nz_max = 2\nmax_truncation = 1e-9");
    let cfg = write(dir.path(), "coarse.toml", &text);
    let out = treewalk(&[
        "verify",
        "--config",
        &cfg,
        "--suite",
        "renewal",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}
