use meshsim::bench::complexity::{bench_complexity, write_complexity, ComplexityOptions};
use meshsim::bench::scenario::{mean_makespan, read_requests_csv, rows, write_requests_csv, REQUEST_HEADER};
use meshsim::bench::stats::nearest_rank;
use meshsim::bench::{run_scenario, sweep_rates, ScenarioConfig};
use meshsim::engine::SchedulerKind;
use meshsim::platform::PlatformConfig;
use meshsim::Error;

fn small() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default().with_rate(200.0);
    cfg.workload.duration_s = 2.0;
    cfg
}

#[test]
fn csv_round_trip_preserves_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("requests.csv");
    let out = run_scenario(&small()).unwrap();
    let written = rows(&out);
    write_requests_csv(&path, &written).unwrap();
    let back = read_requests_csv(&path).unwrap();
    assert_eq!(back, written);
    assert!((mean_makespan(&back) - out.summary.makespan_mean_s).abs() < 1e-9);
}

#[test]
fn empty_record_list_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_requests_csv(&path, &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim_end(), REQUEST_HEADER.join(","));
}

#[test]
fn unwritable_path_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no/such/dir/out.csv");
    let err = write_requests_csv(&path, &[]).unwrap_err();
    assert!(matches!(err, Error::Io { .. } | Error::Csv { .. }), "{err:?}");
    assert!(err.to_string().contains("out.csv"), "{err}");
    assert!(!err.is_config());
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for kind in SchedulerKind::BOTH {
        let cfg = small().with_kind(kind);
        let mut files = Vec::new();
        for i in 0..2 {
            let p = dir.path().join(format!("{kind}{i}.csv"));
            write_requests_csv(&p, &rows(&run_scenario(&cfg).unwrap())).unwrap();
            files.push(std::fs::read(p).unwrap());
        }
        assert_eq!(files[0], files[1]);
    }
}

#[test]
fn nearest_rank_quantiles_are_monotone() {
    let out = run_scenario(&small()).unwrap();
    let mut spans: Vec<f64> = out.records.iter().filter_map(|r| r.makespan()).collect();
    spans.sort_by(f64::total_cmp);
    let qs: Vec<f64> = [1.0, 25.0, 50.0, 75.0, 95.0, 99.0, 100.0].iter().map(|&p| nearest_rank(&spans, p)).collect();
    assert!(qs.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(out.summary.makespan_p50_s, nearest_rank(&spans, 50.0));
}

#[test]
fn sweep_has_one_summary_per_cell() {
    let mut cfg = small();
    cfg.workload.duration_s = 1.0;
    let sweep = sweep_rates(&cfg, &[1.0, 10.0, 100.0]).unwrap();
    assert_eq!(sweep.summaries.len(), 6);
    for kind in SchedulerKind::BOTH {
        let rates: Vec<f64> = sweep.series(kind).iter().map(|s| s.rate_rps).collect();
        assert_eq!(rates, [1.0, 10.0, 100.0]);
    }
}

#[test]
fn sweep_rejects_unsorted_rates() {
    let err = sweep_rates(&small(), &[10.0, 1.0]).unwrap_err();
    assert!(err.is_config());
    assert!(sweep_rates(&small(), &[]).unwrap_err().is_config());
}

#[test]
fn complexity_grid_writes_csv_and_two_surfaces() {
    let dir = tempfile::tempdir().unwrap();
    let options = ComplexityOptions {
        reps: 2,
        min_batch_s: 1e-4,
        hop_batch_s: 1e-4,
        platform: PlatformConfig::desk_scale(),
        ..ComplexityOptions::default()
    };
    let cells = bench_complexity(&[3, 5], &[5, 10, 20], &options).unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells.iter().all(|c| c.central_samples.len() == 2 && c.central_mean_s > 0.0));
    // A longer chain over the same replicas is strictly more solver work.
    let ext = |n, r| cells.iter().find(|c| c.chain_len == n && c.replicas == r).unwrap().central_extensions;
    assert!(ext(5, 20) > ext(3, 20));
    write_complexity(dir.path(), &cells).unwrap();
    for f in ["complexity.csv", "central_surface.svg", "sidecar_surface.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("complexity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn complexity_rejects_zero_reps() {
    let options = ComplexityOptions {
        reps: 0,
        ..ComplexityOptions::default()
    };
    assert!(bench_complexity(&[3], &[5], &options).unwrap_err().is_config());
}
