use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const A2: &str = r#"{"schema": 1, "expression": "x1^3/3 - p2^2/2", "n": 2, "I": [1],
  "window": {"center": [0, 0], "half_widths": [1, 1], "resolution": 21}, "seed": 11, "identity_trials": 40}"#;

fn emfront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emfront")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(sub: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    emfront(&args)
}

#[test]
fn every_subcommand_succeeds_on_the_cuspidal_edge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a2.json", A2);
    let out = dir.path().join("out");
    for sub in ["parse-check", "sample", "classify", "identities", "normal-form"] {
        let o = run(sub, &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "mesh_e.obj",
        "mesh_m.obj",
        "mesh_e.csv",
        "mesh_m.csv",
        "sample_summary.json",
        "reports.json",
        "summary.json",
        "identities.json",
        "normalform.json",
        "normalform_residual.json",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["histogram"]["CuspidalEdge"], 21);
    let header = fs::read_to_string(out.join("mesh_m.csv")).unwrap();
    assert!(header.starts_with("node,q1,q2,p1,p2,z_prime\n"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a2.json", A2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        for sub in ["sample", "classify", "identities", "normal-form"] {
            assert_eq!(run(sub, &cfg, out, &[]).status.code(), Some(0));
        }
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 10);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?} differs");
    }
}

#[test]
fn seed_override_changes_identity_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a2.json", A2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("identities", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run("identities", &cfg, &b, &["--seed", "12"]).status.code(), Some(0));
    let ra = fs::read_to_string(a.join("identities.json")).unwrap();
    let rb = fs::read_to_string(b.join("identities.json")).unwrap();
    assert_ne!(ra, rb);
}

#[test]
fn validation_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = config(dir.path(), "bad.json", &A2.replace("\"seed\"", "\"colour\": 1, \"seed\""));
    let o = run("classify", &bad, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`colour`"));

    let cfg = config(dir.path(), "a2.json", A2);
    let o = run("classify", &cfg, &out, &["--tol-root=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerances.tol_root"));

    let o = run("sample", dir.path().join("missing.json").to_str().unwrap(), &out, &[]);
    assert_eq!(o.status.code(), Some(1));

    let syntax = config(dir.path(), "syntax.json", &A2.replace("x1^3/3", "x1^^3"));
    let o = run("parse-check", &syntax, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`expression`"));

    let sw = config(dir.path(), "sw.json", &A2.replace("x1^3/3 - p2^2/2", "x1^4/4 + p2*x1^2/2"));
    assert_eq!(run("normal-form", &sw, &out, &[]).status.code(), Some(1));
}

#[test]
fn numeric_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a2.json", A2);
    let o = run("identities", &cfg, &dir.path().join("out"), &["--corrupt-pairing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dropped_vertices_are_counted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "log.json", &A2.replace("x1^3/3", "x1*log(x1)"));
    let o = run("sample", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["dropped"], 11 * 21);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(emfront(&["classify"]).status.code(), Some(1));
    assert_eq!(emfront(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(emfront(&["--help"]).status.code(), Some(0));
}
