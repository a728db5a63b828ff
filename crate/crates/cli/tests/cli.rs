use std::process::Command;

fn qpac() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpac"))
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let status = qpac()
        .args([
            "run",
            "--n",
            "3",
            "--concepts",
            "all",
            "--epsilon",
            "0.1",
            "--delta",
            "0.1",
            "--reps",
            "3",
            "--seed",
            "2",
        ])
        .args(["--schedule", "linear,powers-of-two", "--workers", "2", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 8 * 2 * 3);
    assert!(text.starts_with("n,concept,epsilon,delta,schedule,repetition"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.summary.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 16);

    let json = dir.path().join("again.json");
    let out = qpac()
        .args(["summarize", "--in"])
        .arg(&csv)
        .arg("--out")
        .arg(&json)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("frac<e"));
    assert_eq!(
        serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(&json).unwrap()).unwrap(),
        summary
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"n": 2, "concepts": "11", "epsilons": [0.2], "deltas": [0.2], "repetitions": 5, "seed": 1}"#,
    )
    .unwrap();
    let csv = dir.path().join("r.csv");
    let out = qpac()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--reps", "2", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn verify_passes() {
    let out = qpac().args(["verify", "--json"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn bad_arguments_fail() {
    let bad = [
        vec!["run", "--n", "3", "--epsilon", "0.7", "--delta", "0.1"],
        vec!["run", "--n", "3", "--epsilon", "0.1"],
        vec![
            "run",
            "--n",
            "3",
            "--epsilon",
            "0.1",
            "--delta",
            "0.1",
            "--schedule",
            "cubic",
        ],
        vec![
            "run",
            "--n",
            "3",
            "--epsilon",
            "0.1",
            "--delta",
            "0.1",
            "--concepts",
            "10x",
        ],
        vec!["summarize", "--in", "/nonexistent/rows.csv"],
        vec!["frobnicate"],
    ];
    for args in bad {
        let out = qpac().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
    }
}
