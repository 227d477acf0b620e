use std::fs;
use std::process::{Command, Output};

fn massart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_massart"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn verify_passes_by_default() {
    let out = massart(&["verify"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 14);
}

#[test]
fn verify_with_zero_tau_exits_with_oracle_failure() {
    let out = massart(&["verify", "--tau", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL reweighted_loss_convexity"), "{text}");
}

#[test]
fn simulate_writes_transcripts_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = massart(&[
        "simulate-halfspace",
        "--t-horizon",
        "200",
        "--seeds",
        "2",
        "--seed",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for seed in [5, 6] {
        let csv = fs::read_to_string(out_dir.join(format!("run_{seed}.csv"))).unwrap();
        assert!(csv.starts_with("round,action,observed,score,loss,explored,cum_metric,w_norm\n"));
        assert_eq!(csv.lines().count(), 201);
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["aggregate"]["seeds"], serde_json::json!([5, 6]));
    assert_eq!(report["runs"][0]["halfspace_config"]["horizon"], 200);
}

#[test]
fn repeated_runs_write_identical_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = massart(&[
            "simulate-bandit",
            "--environment",
            "monotone_k",
            "--t-horizon",
            "300",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(p.join("run_0.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "t_horizon = 100\nd = 4\nenvironment = \"sorted_k\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = massart(&[
        "simulate-bandit",
        "--config",
        cfg.to_str().unwrap(),
        "--d",
        "6",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let run = &report["runs"][0];
    assert_eq!(run["bandit_config"]["d"], 6);
    assert_eq!(run["horizon"], 100);
    assert_eq!(run["environment"], "sorted_k");
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "unknown_key = 1\n").unwrap();
    for args in [
        vec!["simulate-halfspace", "--eta", "0.7"],
        vec!["simulate-halfspace", "--config", bad.to_str().unwrap()],
        vec!["simulate-bandit", "--environment", "massart2"],
        vec!["simulate-bandit", "--k", "12", "--gamma", "0.3"],
        vec!["simulate-halfspace", "--adversary", "sideways"],
        vec!["simulate-halfspace", "--seeds", "0"],
    ] {
        let out = massart(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn baseline_reports_all_three_rates() {
    let out = massart(&["baseline", "--t-horizon", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("learner") && text.contains("perceptron") && text.contains("random"));
}
