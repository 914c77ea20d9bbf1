use std::sync::Arc;

use meshsim::bench::{run_scenario, Scenario, ScenarioConfig};
use meshsim::engine::{self, DropPolicy, EngineOptions, SchedulerKind, Status};
use meshsim::metadata::MetadataConfig;
use meshsim::platform::{build_platform, HostId, PlatformConfig};
use meshsim::sched::latency::latency_decentral;
use meshsim::workload::{ReplicaId, ReplicaInstance, Request, RequestId, ServiceChain, ServiceId};

fn busy_config(kind: SchedulerKind) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default().with_kind(kind).with_rate(600.0);
    cfg.workload.duration_s = 2.0;
    cfg
}

#[test]
fn timestamps_never_run_backwards() {
    for kind in SchedulerKind::BOTH {
        let out = run_scenario(&busy_config(kind)).unwrap();
        assert!(out.records.iter().all(|r| r.is_monotone()), "{kind}");
    }
}

#[test]
fn every_request_is_accounted_for() {
    for kind in SchedulerKind::BOTH {
        let cfg = busy_config(kind);
        let n = cfg.chain().unwrap().len();
        let out = run_scenario(&cfg).unwrap();
        let s = &out.summary;
        assert_eq!(s.completed + s.dropped, s.generated);
        assert!(s.makespan_p50_s <= s.makespan_p95_s && s.makespan_p95_s <= s.makespan_p99_s);
        assert!(s.makespan_p99_s <= s.makespan_max_s);
        for r in &out.records {
            match r.status {
                Status::Completed => assert_eq!(r.hops.len(), n),
                Status::Dropped(_) => assert!(r.t_complete.is_none()),
            }
        }
    }
}

#[test]
fn light_load_completes_everything() {
    let out = run_scenario(&ScenarioConfig::default().with_rate(1.0)).unwrap();
    assert_eq!(out.summary.dropped, 0);
    assert!((5..=20).contains(&out.summary.completed), "{}", out.summary.completed);
}

#[test]
fn busy_core_seconds_cover_the_executed_work() {
    let out = run_scenario(&busy_config(SchedulerKind::Decentralized)).unwrap();
    let executed: usize = out
        .records
        .iter()
        .map(|r| r.hops.iter().filter(|h| h.t_exec_end.is_some()).count())
        .sum();
    // 1 Gflop per stage at 10 Gflop/s per core.
    let busy: f64 = out.stats.busy_core_seconds.iter().sum();
    assert!((busy - executed as f64 * 0.1).abs() < 1e-6 * busy.max(1.0), "{busy} vs {executed}");
}

#[test]
fn multi_hop_makespan_reconciles_on_every_completed_request() {
    let mut cfg = ScenarioConfig::default().with_rate(20.0);
    cfg.workload.duration_s = 5.0;
    cfg.scheduler.charge_client_decision = false;
    let out = run_scenario(&cfg).unwrap();
    for r in out.records.iter().filter(|r| r.is_completed()) {
        let f = latency_decentral(&r.twl(), &r.proc_latencies(), &r.hop_sidecar_latencies()).unwrap();
        assert!((r.makespan().unwrap() - f).abs() < 1e-9, "request {:?}", r.request_id);
    }
}

#[test]
fn best_effort_drops_less_than_drop() {
    let mut cfg = ScenarioConfig::default().with_rate(1500.0);
    cfg.workload.duration_s = 1.0;
    let dropped = |p: DropPolicy| {
        let mut c = cfg.clone();
        c.scheduler.drop_policy = p;
        run_scenario(&c).unwrap().summary.dropped
    };
    assert!(dropped(DropPolicy::BestEffort) <= dropped(DropPolicy::Drop));
}

#[test]
fn fresh_metadata_matches_ground_truth_everywhere() {
    let mut cfg = busy_config(SchedulerKind::Decentralized);
    cfg.metadata = MetadataConfig::strong();
    cfg.run.audit = true;
    let out = run_scenario(&cfg).unwrap();
    assert!(out.stats.decisions > 0);
    assert_eq!(out.stats.mismatches, 0);
}

#[test]
fn scheduler_kind_does_not_change_the_workload() {
    let a = Scenario::build(&busy_config(SchedulerKind::Centralized)).unwrap();
    let b = Scenario::build(&busy_config(SchedulerKind::Decentralized)).unwrap();
    assert_eq!(a.replicas, b.replicas);
    let ta: Vec<f64> = a.requests.iter().map(|r| r.submit_time).collect();
    let tb: Vec<f64> = b.requests.iter().map(|r| r.submit_time).collect();
    assert_eq!(ta, tb);
}

#[test]
fn idle_platform_draws_idle_power_to_the_horizon() {
    let platform = build_platform(&PlatformConfig {
        hosts_total: 3,
        regions: 1,
        ..PlatformConfig::default()
    })
    .unwrap();
    let replicas = [ReplicaInstance {
        replica_id: ReplicaId(0),
        service_id: ServiceId(0),
        host_id: HostId(2),
        actor_pool: 1,
    }];
    let opts = EngineOptions {
        horizon: Some(100.0),
        ..EngineOptions::decentralized()
    };
    let out = engine::run(&platform, &replicas, &[], &opts).unwrap();
    for e in &out.stats.energy_j {
        assert!((e - 2000.0).abs() < 1e-9, "{e}");
    }
}

#[test]
fn unknown_service_is_a_config_error() {
    let platform = build_platform(&PlatformConfig {
        hosts_total: 2,
        regions: 1,
        ..PlatformConfig::default()
    })
    .unwrap();
    let chain = Arc::new(ServiceChain::uniform(2, 1e9, 0.0, 10.0).unwrap());
    let replicas = [ReplicaInstance {
        replica_id: ReplicaId(0),
        service_id: ServiceId(0),
        host_id: HostId(1),
        actor_pool: 1,
    }];
    let req = [Request {
        request_id: RequestId(0),
        chain,
        submit_time: 0.0,
        origin_host: HostId(7),
    }];
    let err = engine::run(&platform, &replicas, &req, &EngineOptions::default()).unwrap_err();
    assert!(err.is_config(), "{err}");
}
