use std::path::Path;

use shfl::formats::*;
use shfl::Error;
use shfl_core::model::{LocalDataset, Sample};
use shfl_core::scheduler::{admm_solve, random_instance, InstanceSpec, SolverConfig};
use shfl_core::sim::{MetricsLog, MetricsRow};

fn sample_log() -> MetricsLog {
    let rows = (0..4)
        .map(|r| MetricsRow {
            round: r,
            wall_clock_s: r as f64 * 0.0123456789,
            policy: "random-5/elastic".into(),
            selected_count: if r == 0 { 0 } else { 5 },
            sum_sigma: 0.1 / (r + 1) as f64,
            max_latency_s: 1.0 / 3.0,
            test_acc: 0.5 + r as f64 * 0.1,
            test_loss: std::f64::consts::LN_2 - r as f64 * 0.01,
        })
        .collect();
    MetricsLog { rows }
}

#[test]
fn dataset_round_trips_exactly() {
    let samples = vec![
        Sample { features: vec![0.1, -2.5e-7, 1.0 / 3.0, 1.0], label: 1.0 },
        Sample { features: vec![1e300, -0.0, 7.0, 1.0], label: -1.0 },
    ];
    let ds = LocalDataset::new(samples).unwrap();
    let text = dataset_to_string(&ds);
    let back = parse_dataset(&text, Path::new("d.csv")).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn dataset_errors_carry_line_numbers() {
    let bad = "# header\n1,0.5,0.25\n-1,0.5,oops\n";
    match parse_dataset(bad, Path::new("d.csv")) {
        Err(Error::Dataset { line, msg, .. }) => {
            assert_eq!(line, 3);
            assert!(msg.contains("oops"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_dataset("x,1\n", Path::new("d.csv")), Err(Error::Dataset { line: 1, .. })));
}

#[test]
fn instance_and_schedule_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = random_instance(&InstanceSpec::default(), 3).unwrap();
    let ipath = dir.path().join("inst.json");
    write_file(&ipath, instance_to_json(&inst)).unwrap();
    assert_eq!(read_instance(&ipath).unwrap(), inst);

    let s = admm_solve(&inst, &SolverConfig::default()).unwrap();
    let spath = dir.path().join("sched.json");
    write_file(&spath, schedule_to_json(&s)).unwrap();
    assert_eq!(read_schedule(&spath).unwrap(), s);
}

#[test]
fn instance_files_are_versioned_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let inst = random_instance(&InstanceSpec::default(), 0).unwrap();
    let path = dir.path().join("inst.json");

    let text = instance_to_json(&inst).replacen("\"schema_version\": 1", "\"schema_version\": 9", 1);
    write_file(&path, &text).unwrap();
    let e = read_instance(&path).unwrap_err();
    assert_eq!(e.exit_code(), 2, "{e}");

    let mut bad = inst.clone();
    bad.rho = 2.0;
    write_file(&path, instance_to_json(&bad)).unwrap();
    assert_eq!(read_instance(&path).unwrap_err().exit_code(), 2);

    write_file(&path, "{\"schema_version\": 1,\n").unwrap();
    assert!(matches!(read_instance(&path), Err(Error::Parse { .. })));

    let missing = read_instance(&dir.path().join("nope.json")).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }));
    assert_eq!(missing.exit_code(), 1);
}

#[test]
fn metrics_csv_round_trips_and_has_fixed_columns() {
    let log = sample_log();
    let csv = metrics_to_csv(&log).unwrap();
    assert_eq!(csv.lines().next().unwrap(), METRICS_COLUMNS.join(","));
    assert_eq!(metrics_from_csv(&csv).unwrap(), log);

    let empty = metrics_to_csv(&MetricsLog::default()).unwrap();
    assert_eq!(empty.trim_end(), METRICS_COLUMNS.join(","));
    assert!(metrics_from_csv(&empty).unwrap().rows.is_empty());
}

#[test]
fn metrics_json_round_trips() {
    let log = sample_log();
    let text = metrics_to_json(&log);
    assert!(text.contains("\"schema_version\": 1"));
    assert_eq!(metrics_from_json(&text).unwrap(), log);
}
