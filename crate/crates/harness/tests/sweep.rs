use cpsoc_harness::{run_grid, run_point, write_csv, ExperimentConfig};

fn short(runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        runs,
        changes_per_run: 1,
        ..ExperimentConfig::default()
    }
}

#[test]
fn full_sweep_gives_36_rows_in_order() {
    let config = short(1);
    let mut seen = 0;
    let rows = run_grid(&config, |_| seen += 1).unwrap();
    assert_eq!(rows.len(), 36);
    assert_eq!(seen, 36);
    let order: Vec<(u64, usize)> = rows.iter().map(|r| (r.f, r.m)).collect();
    let mut expected = Vec::new();
    for f in [500, 1000, 2500, 5000] {
        for m in [1, 5, 10, 20, 30, 40, 50, 100, 200] {
            expected.push((f, m));
        }
    }
    assert_eq!(order, expected);
    for r in &rows {
        assert_eq!(r.runs, 1);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.wall_time_s, 0.0);
        assert!(r.mean_offline_error >= 0.0);
    }
}

#[test]
fn repeated_grid_is_byte_identical() {
    let mut config = short(3);
    config.sweep.change_frequencies = vec![500, 1000];
    config.sweep.peak_counts = vec![1, 10];
    config.changes_per_run = 3;
    let csv = |config: &ExperimentConfig| {
        let mut out = Vec::new();
        write_csv(&run_grid(config, |_| {}).unwrap(), &mut out).unwrap();
        out
    };
    assert_eq!(csv(&config), csv(&config));
}

#[test]
fn rows_are_the_mean_of_seeded_runs() {
    let mut config = short(3);
    config.base_seed = 40;
    config.sweep.change_frequencies = vec![1000];
    config.sweep.peak_counts = vec![5];
    let rows = run_grid(&config, |_| {}).unwrap();
    let runs: Vec<f64> = (40..43).map(|s| run_point(&config, 1000, 5, s).unwrap()).collect();
    let mean = runs.iter().sum::<f64>() / 3.0;
    assert_eq!(rows[0].mean_offline_error, mean);
}

#[test]
fn wall_time_is_recorded_on_request() {
    let mut config = short(1);
    config.sweep.change_frequencies = vec![500];
    config.sweep.peak_counts = vec![10];
    config.record_wall_time = true;
    assert!(run_grid(&config, |_| {}).unwrap()[0].wall_time_s > 0.0);
}

#[test]
fn invalid_grid_fails_before_running() {
    let mut config = short(1);
    config.sweep.peak_counts = vec![10, 0];
    let mut called = false;
    let err = run_grid(&config, |_| called = true).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!called);
}
