use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_screenalloc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write_stylized(dir: &Path) {
    let inst = screenalloc::fixtures::stylized_instance();
    std::fs::write(dir.join("inst.json"), serde_json::to_vec(&inst).unwrap()).unwrap();
}

#[test]
fn gen_is_deterministic_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = run(
            &[
                "gen",
                "--regime",
                "lo-val-lo-cost",
                "--seed",
                "3",
                "--n",
                "40",
                "--out",
                out,
            ],
            dir.path(),
        );
        assert!(o.status.success());
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["command"], "gen");
}

#[test]
fn unknown_regime_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--regime", "bogus", "--out", "x.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn missing_instance_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--instance", "nope.json", "--out", "s.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreachable_lambda_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    write_stylized(dir.path());
    let o = run(
        &[
            "solve",
            "--instance",
            "inst.json",
            "--lambda",
            "1e9",
            "--mode",
            "noscreen",
            "--out",
            "s.json",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("infeasible"), "{stdout}");
}

#[test]
fn frontier_single_step_and_formatting() {
    let dir = tempfile::tempdir().unwrap();
    write_stylized(dir.path());
    let o = run(
        &[
            "frontier",
            "--instance",
            "inst.json",
            "--lambda-min",
            "1000",
            "--lambda-max",
            "3000",
            "--steps",
            "1",
            "--out",
            "f.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("lambda,utility_screen"));
    assert!(lines[1].starts_with("1000.000000,"), "{}", lines[1]);
}

#[test]
fn simulate_reports_both_estimates() {
    let dir = tempfile::tempdir().unwrap();
    write_stylized(dir.path());
    let o = run(
        &["solve", "--instance", "inst.json", "--lambda", "0", "--out", "s.json"],
        dir.path(),
    );
    assert!(o.status.success());
    let o = run(
        &[
            "simulate",
            "--instance",
            "inst.json",
            "--policy",
            "s.json",
            "--draws",
            "1",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["monte_carlo"]["draws"], 1);
    assert!((v["exact"]["expected_utility"].as_f64().unwrap() - 4000.0).abs() < 1e-9);
}
