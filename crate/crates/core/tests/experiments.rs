use qpac::experiments::{read_rows, run_grid, run_grid_to_csv, summarize, ConceptSelection, ExperimentConfig};
use qpac::Schedule;

fn small_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(3, ConceptSelection::Random(3), 0.1, 0.1, seed);
    cfg.epsilons = vec![0.1, 0.2];
    cfg.schedules = vec![Schedule::Linear, Schedule::PowersOfTwo];
    cfg.repetitions = 4;
    cfg
}

#[test]
fn same_seed_gives_identical_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let mut cfg = small_config(11);
    cfg.workers = Some(1);
    run_grid_to_csv(&cfg, &a).unwrap();
    cfg.workers = Some(4);
    run_grid_to_csv(&cfg, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.csv");
    run_grid_to_csv(&small_config(12), &c).unwrap();
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn row_count_is_grid_product() {
    let cfg = small_config(3);
    let out = run_grid(&cfg).unwrap();
    assert_eq!(out.len(), 3 * 2 * 2 * 4);
    assert_eq!(cfg.row_count().unwrap(), out.len());
    for o in &out {
        assert_eq!(o.row.oracle_calls, o.record.oracle_calls);
        assert!(o.row.shot_calls <= o.row.oracle_calls);
        assert!((0.0..=1.0).contains(&o.row.final_error));
    }
}

#[test]
fn fixed_distribution_shares_angles_across_repetitions() {
    let mut cfg = ExperimentConfig::new(
        4,
        ConceptSelection::Explicit(vec!["1100".into(), "0011".into()]),
        0.1,
        0.1,
        5,
    );
    cfg.repetitions = 5;
    let redraw = run_grid(&cfg).unwrap();
    cfg.fixed_distribution = true;
    let fixed = run_grid(&cfg).unwrap();

    for concept in ["1100", "0011"] {
        let angles = |rows: &[qpac::experiments::RunOutcome]| -> Vec<String> {
            rows.iter()
                .filter(|o| o.row.concept == concept)
                .map(|o| o.row.angles.clone())
                .collect()
        };
        let f = angles(&fixed);
        assert!(f.iter().all(|a| a == &f[0]));
        let r = angles(&redraw);
        assert!(r.iter().any(|a| a != &r[0]));
    }
}

#[test]
fn csv_round_trip_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let out = run_grid_to_csv(&small_config(9), &path).unwrap();
    let rows = read_rows(&path).unwrap();
    assert_eq!(rows.len(), out.len());
    for (r, o) in rows.iter().zip(&out) {
        assert_eq!(r, &o.row);
    }
    let summary = summarize(&rows).unwrap();
    assert_eq!(summary.len(), 3 * 2 * 2);
    assert!(summary.iter().all(|s| s.runs == 4));
}

#[test]
fn config_file_drives_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "concepts": "all", "epsilon": [0.2], "delta": [0.2], "reps": 2, "seed": 4}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::from_json_file(&path).unwrap();
    assert_eq!(run_grid(&cfg).unwrap().len(), 4 * 2);

    std::fs::write(
        &path,
        r#"{"n": 2, "concepts": "all", "epsilon": [0.2], "delta": [0.2], "bogus": 1}"#,
    )
    .unwrap();
    assert!(ExperimentConfig::from_json_file(&path).is_err());
}
