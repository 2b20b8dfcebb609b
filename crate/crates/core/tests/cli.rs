use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_tnbpa")).args(args).output().unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn check_not_bisimilar() {
    let (out, _, code) = run(&["check", &fixture("preempted-choice.bpa"), "--left", "X", "--right", "Y"]);
    assert_eq!(out, "not bisimilar\nleft  X = X\nright Y = Y\n");
    assert_eq!(code, 1);
}

#[test]
fn check_bisimilar_with_audit() {
    let (out, _, code) = run(&["check", &fixture("preempted-choice.bpa"), "--left", "X'", "--right", "Y'", "--verify"]);
    assert!(out.starts_with("bisimilar\nleft  X' = X'\nright Y' = X'\ngame: no distinction found up to 16\n"), "{out}");
    assert!(out.ends_with(", 0 failures\n"), "{out}");
    assert_eq!(code, 0);
}

#[test]
fn check_json_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let (out, _, code) = run(&[
        "check",
        &fixture("inert-tau.bpa"),
        "--left",
        "A Y",
        "--right",
        "B Y",
        "--json",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "bisimilar");
    assert_eq!(v["base"]["primes"], serde_json::json!(["B", "Y"]));
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["iterations"].as_array().unwrap().len(), 2);
}

#[test]
fn base_output() {
    let (out, _, code) = run(&["base", &fixture("inert-tau.bpa")]);
    assert_eq!(out, "prime B\nprime Y\nA = B\nX = B Y\n");
    assert_eq!(code, 0);
    let (out, _, _) = run(&["base", &fixture("preempted-choice.bpa"), "--iterations"]);
    assert_eq!(out.matches("# iteration").count(), 2);
}

#[test]
fn standardize_collapses_the_cycle() {
    let (out, _, code) = run(&["standardize", &fixture("tau-cycle.bpa")]);
    assert_eq!(code, 0);
    assert!(out.contains("# contracted Q into P\n# contracted R into P\nconstants: P S\n"), "{out}");
}

#[test]
fn norms_output() {
    let (out, _, _) = run(&["norms", &fixture("preempted-choice.bpa")]);
    assert_eq!(out, "X 1\nX' 1\nY 1\nY' 1\n");
}

#[test]
fn oracle_exit_codes() {
    let (out, _, code) = run(&["oracle", &fixture("preempted-choice.bpa"), "X", "Y", "--k", "4"]);
    assert!(out.starts_with("distinguished at level 2\n"));
    assert_eq!(code, 1);
    let (_, _, code) = run(&["oracle", &fixture("inert-tau.bpa"), "A", "B", "--k", "8"]);
    assert_eq!(code, 0);
}

#[test]
fn input_errors_exit_two() {
    let (_, err, code) = run(&["check", &fixture("unnormed.bpa"), "--left", "X", "--right", "Y"]);
    assert_eq!(code, 2);
    assert!(err.contains("not totally normed"));
    let (_, _, code) = run(&["check", &fixture("preempted-choice.bpa"), "--left", "X", "--right", "Q"]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&["check", "/nonexistent.bpa", "--left", "X", "--right", "Y"]);
    assert_eq!(code, 2);
}

#[test]
fn gen_is_deterministic() {
    let (a, _, _) = run(&["gen", "--seed", "11"]);
    let (b, _, _) = run(&["gen", "--seed", "11"]);
    assert_eq!(a, b);
    assert!(a.starts_with("constants:"));
}

#[test]
fn small_fuzz_is_clean() {
    let (out, _, code) = run(&["fuzz", "--trials", "5", "--pairs", "4", "--jobs", "2"]);
    assert_eq!(code, 0, "{out}");
    let last: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(last["summary"]["failed_trials"], 0);
    assert_eq!(out.lines().count(), 6);
}
