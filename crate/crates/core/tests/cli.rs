use std::process::{Command, Output};

use serde_json::Value;

const SUBCOMMANDS: [&str; 9] = [
    "count-distances",
    "estimate-exponent",
    "elekes-analyze",
    "test-degeneracy",
    "flex",
    "trace-motion",
    "classify-curve",
    "check-simplicity",
    "bound",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curve-rigidity")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// Output with the run-dependent parts of `meta` removed.
fn body(out: &Output) -> Value {
    let mut v = json(out);
    let meta = v["meta"].as_object_mut().unwrap();
    meta.remove("elapsed_ms");
    meta.remove("threads");
    v
}

#[test]
fn bound_prints_delta() {
    let out = run(&["bound", "--np", "100", "--nxi", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["delta"].as_f64().unwrap() - 288.91).abs() < 0.01);
    assert_eq!(v["meta"]["command"], "bound");
}

#[test]
fn circle_count() {
    let out = run(&["count-distances", "--curve", "builtin:unit_circle", "--scheme", "angle:6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["count"], 3);
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(run(&["count-distances"]).status.code(), Some(2));
    assert_eq!(run(&["count-distances", "--curve", "builtin:spiral"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--np", "100", "--nxi", "10", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn every_subcommand_self_test_passes() {
    for cmd in SUBCOMMANDS {
        let out = run(&[cmd, "--self-test"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.lines().any(|l| l.starts_with("ok")), "{cmd}");
        assert!(!text.contains("FAIL"), "{cmd}");
    }
}

#[test]
fn classify_curve_csv_profile() {
    let out = run(&["classify-curve", "--curve", "builtin:circular_helix(0.5)", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("order,s,norm"));
    assert_eq!(text.lines().count(), 1 + 4 * 64);
}

#[test]
fn runs_are_deterministic() {
    let cases: [&[&str]; 4] = [
        &["count-distances", "--curve", "builtin:parabola", "--scheme", "random:3:40"],
        &["elekes-analyze", "--curve", "builtin:parabola", "--pairs", "30"],
        &["test-degeneracy", "--curve", "builtin:parabola"],
        &["trace-motion", "--curve", "builtin:unit_circle", "--triangle", "0.0,0.8,1.7"],
    ];
    for args in cases {
        let a = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(body(&a), body(&run(args)), "{args:?}");
        let one: Vec<&str> = ["--threads", "1"].iter().chain(args).copied().collect();
        let eight: Vec<&str> = ["--threads", "8"].iter().chain(args).copied().collect();
        assert_eq!(body(&run(&one)), body(&run(&eight)), "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flex.json");
    let fw = r#"{"curve": {"kind": "builtin", "name": "unit_circle"}, "embedding": [-2.0, 0.0, 2.0], "edges": [[0, 1], [0, 2], [1, 2]]}"#;
    let out = run(&["--out", path.to_str().unwrap(), "flex", "--framework", fw]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["flexibility"]["numerical_nullity"], 1);
}
