//! End-to-end checks of the command-line interface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_evomatch")
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn replicate_succeeds_with_exit_zero() {
    let out = run(&["replicate", "ex1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["results"]["pass"], true);
}

#[test]
fn replicate_rejects_unknown_case_with_exit_two() {
    let out = run(&["replicate", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["stable-enum", scenario("ex3.scn").to_str().unwrap()],
        vec!["replicate", "ex3"],
        vec![
            "bn-check",
            scenario("b4.scn").to_str().unwrap(),
            "--profile",
            "pooled-split",
        ],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "nondeterministic report for {args:?}");
    }
}

#[test]
fn stable_check_reports_verdicts() {
    let path = scenario("ex1.scn");
    let out = run(&[
        "stable-check",
        path.to_str().unwrap(),
        "--profile",
        "stable",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["verdict"], "stable");

    let out = run(&[
        "stable-check",
        path.to_str().unwrap(),
        "--profile",
        "crossed",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["verdict"], "unstable");
    assert_eq!(v["results"]["reason"], "blocking");
}

#[test]
fn bn_check_case_restriction() {
    let path = scenario("b2.scn");
    let all = run(&["bn-check", path.to_str().unwrap(), "--profile", "pooled"]);
    let v: serde_json::Value = serde_json::from_slice(&all.stdout).unwrap();
    assert_eq!(v["results"]["verdict"], "unstable");
    assert_eq!(v["results"]["witness"]["case"], "III*");

    let restricted = run(&[
        "bn-check",
        path.to_str().unwrap(),
        "--profile",
        "pooled",
        "--case-order",
        "I,II,III",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&restricted.stdout).unwrap();
    assert_eq!(v["results"]["witness"], serde_json::Value::Null);
}

#[test]
fn fitness_values_are_rational_strings() {
    let path = scenario("b4.scn");
    let out = run(&[
        "fitness",
        path.to_str().unwrap(),
        "--profile",
        "pooled-split",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["g_theta"], "26/3"); // 78/9 in lowest terms
    assert_eq!(v["results"]["g_tau"], "79/9");
}

#[test]
fn verdict_complete_mode_on_pd() {
    let path = scenario("pd.scn");
    let out = run(&["verdict", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["aggregate"], "theta_ES_against_tau");
}

#[test]
fn construct_verifies_output() {
    let path = scenario("ex1.scn");
    let out = run(&["construct", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["case"], "assortative");
    assert_eq!(v["results"]["verified_stable"], true);
}

#[test]
fn text_format_is_available() {
    let out = run(&["replicate", "ex3", "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("case ex3: PASS"));
}

#[test]
fn solve_ne_counts_equilibria() {
    let path = scenario("ex1.scn");
    let out = run(&[
        "solve-ne",
        path.to_str().unwrap(),
        "--row",
        "theta",
        "--col",
        "theta",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["count"], 3);
    let out = run(&[
        "solve-ne",
        path.to_str().unwrap(),
        "--row",
        "tau",
        "--col",
        "tau",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["count"], 1);
}

#[test]
fn missing_scenario_is_exit_two() {
    let out = run(&["stable-enum", "/nonexistent.scn"]);
    assert_eq!(out.status.code(), Some(2));
}
