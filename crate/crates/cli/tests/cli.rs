//! Process-level tests of the `linfty-ot` binary: exit codes, artifact
//! layout, and byte-identical reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MU_CSV: &str = "x1,x2,weight\n0,0,0.25\n1,0,0.25\n0,1,0.5\n";
const NU_CSV: &str = "x1,x2,weight\n2,0,0.5\n0,2,0.25\n1,1,0.25\n";
// Marginals match MU_CSV and NU_CSV exactly.
const PLAN_CSV: &str = "i,j,mass\n0,0,0.25\n1,1,0.25\n2,0,0.25\n2,2,0.25\n";

fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linfty-ot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("linfty-cli-{}-{label}", std::process::id()));
    fs::remove_dir_all(&dir).ok();
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

fn fixture(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).expect("fixture written");
    path.display().to_string()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn solve_writes_deterministic_artifacts() {
    let dir = scratch("solve");
    let mu = fixture(&dir, "mu.csv", MU_CSV);
    let nu = fixture(&dir, "nu.csv", NU_CSV);
    let first = dir.join("first");
    let second = dir.join("second");

    for out in [&first, &second] {
        let run = run_bin(&[
            "solve",
            &mu,
            &nu,
            "--cost",
            "euclidean",
            "--out",
            &out.display().to_string(),
        ]);
        assert!(
            run.status.success(),
            "solve failed: {}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    for name in ["summary.csv", "certificate.json", "plan.csv"] {
        let a = read(&first.join(name));
        let b = read(&second.join(name));
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn solve_at_a_fixed_exponent_reports_the_plan_value() {
    let dir = scratch("solve-p");
    let mu = fixture(&dir, "mu.csv", MU_CSV);
    let nu = fixture(&dir, "nu.csv", NU_CSV);
    let out = dir.join("out");
    let run = run_bin(&[
        "solve",
        &mu,
        &nu,
        "--cost",
        "sup-norm",
        "--p",
        "2",
        "--out",
        &out.display().to_string(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = read(&out.join("summary.csv"));
    assert!(summary.contains("value"), "summary should report the plan value:\n{summary}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn certify_accepts_a_consistent_plan() {
    let dir = scratch("certify");
    let mu = fixture(&dir, "mu.csv", MU_CSV);
    let nu = fixture(&dir, "nu.csv", NU_CSV);
    let plan = fixture(&dir, "plan.csv", PLAN_CSV);
    let out = dir.join("out");
    let run = run_bin(&[
        "certify",
        &plan,
        &mu,
        &nu,
        "--cost",
        "euclidean",
        "--out",
        &out.display().to_string(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = read(&out.join("summary.csv"));
    assert!(summary.contains("pair_monotone"), "missing pair verdict:\n{summary}");
    assert!(summary.contains("cyclically_monotone"), "missing cycle verdict:\n{summary}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_one() {
    let dir = scratch("config-errors");
    let mu = fixture(&dir, "mu.csv", MU_CSV);
    let nu = fixture(&dir, "nu.csv", NU_CSV);
    let negative = fixture(&dir, "negative.csv", "x1,x2,weight\n0,0,0.5\n1,1,-0.5\n");
    let unknown_scenario = fixture(&dir, "unknown.json", "{\"scenario\": \"bananas\"}\n");
    let out = dir.join("out").display().to_string();

    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("unknown cost family", vec!["solve", &mu, &nu, "--cost", "banana", "--out", &out]),
        ("negative weight", vec!["solve", &negative, &nu, "--cost", "euclidean", "--out", &out]),
        ("missing measure file", vec!["solve", "no-such.csv", &nu, "--cost", "euclidean", "--out", &out]),
        ("unknown scenario", vec!["run", &unknown_scenario, "--out", &out]),
        ("usage error", vec!["frobnicate"]),
    ];
    for (label, args) in cases {
        let run = run_bin(&args);
        assert_eq!(run.status.code(), Some(1), "{label}: wrong exit code");
        assert!(!run.stderr.is_empty(), "{label}: expected a diagnostic on stderr");
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn failed_scenario_assertions_exit_two_with_artifacts() {
    let dir = scratch("assertion");
    // A zero-step rotation is the identity plan, which is cyclically
    // monotone; the scenario asserts the opposite and must say so.
    let config = fixture(&dir, "rotation.json", "{\"scenario\": \"rotation\", \"step\": 0}\n");
    let out = dir.join("out");
    let run = run_bin(&["run", &config, "--out", &out.display().to_string()]);
    assert_eq!(run.status.code(), Some(2), "{}", String::from_utf8_lossy(&run.stderr));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("assertion"), "stderr should name the assertion: {stderr}");
    // Artifacts are still written so the failure can be inspected.
    let summary = read(&out.join("summary.csv"));
    assert!(summary.contains("cyclically_monotone,pass"), "summary:\n{summary}");
    assert!(out.join("certificate.json").is_file());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_reproduces_a_scripted_scenario() {
    let dir = scratch("run");
    let config = fixture(&dir, "rotation.json", "{\"scenario\": \"rotation\"}\n");
    let out = dir.join("out");
    let run = run_bin(&["run", &config, "--out", &out.display().to_string()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = read(&out.join("summary.csv"));
    assert!(summary.contains("pair_monotone,pass"), "summary:\n{summary}");
    assert!(summary.contains("cyclically_monotone,fail"), "summary:\n{summary}");
    assert!(summary.contains("witness_own_max"), "summary:\n{summary}");
    fs::remove_dir_all(&dir).ok();
}
