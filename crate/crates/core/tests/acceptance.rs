//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are fixed here and printed with each line.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use meshsim::bench::complexity::{bench_complexity, ComplexityOptions, GRID_CHAINS, GRID_REPLICAS};
use meshsim::bench::scenario::{rows, run_scenario, write_requests_csv, Scenario};
use meshsim::bench::stats::linear_regression;
use meshsim::bench::sweep::sweep_rates;
use meshsim::bench::ScenarioConfig;
use meshsim::engine::{self, EngineOptions, HostCpuState, SchedulerKind, TaskKey};
use meshsim::metadata::MetadataConfig;
use meshsim::platform::{build_platform, HostId, PlatformConfig};
use meshsim::sched::central::{centralized_solve, Infeasible};
use meshsim::sched::latency::{latency_central, latency_decentral};
use meshsim::sched::sidecar::{sidecar_walk, SidecarPolicy};
use meshsim::workload::{ReplicaId, ReplicaInstance, Request, RequestId, ServiceChain, ServiceId};

use common::{enumerate, random_instance, Verdict};

const ORACLE_INSTANCES: u64 = 250;
const ORACLE_REL_TOL: f64 = 1e-9;
const CPU_TOL: f64 = 1e-9;
const RECONCILE_TOL: f64 = 1e-9;
const MONOTONE_NOISE: f64 = 0.10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn desk_config() -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    ScenarioConfig::load(&path).expect("desk scenario loads")
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn solver_oracle() -> Outcome {
    let started = Instant::now();
    let mut feasible = 0;
    let mut infeasible = 0;
    let mut failures = Vec::new();
    for seed in 0..ORACLE_INSTANCES {
        let inst = random_instance(seed);
        let got = centralized_solve(&inst.chain, &inst.slices(), &inst.metrics, &inst.platform, inst.origin);
        match (enumerate(&inst), got) {
            (Ok(best), Ok(path)) => {
                feasible += 1;
                if !close(best.cost, path.total_cost, ORACLE_REL_TOL) || path.est_latency > inst.chain.latency_budget {
                    failures.push(format!("seed {seed}: cost {} vs oracle {}", path.total_cost, best.cost));
                }
            }
            (Err(v), Err(e)) => {
                infeasible += 1;
                let same = matches!(
                    (v, e),
                    (Verdict::LatencyBudget, Infeasible::LatencyBudget)
                ) || matches!((v, e), (Verdict::NoCapacity(a), Infeasible::NoCapacity { stage: b }) if a == b);
                if !same {
                    failures.push(format!("seed {seed}: verdict {e:?} vs oracle {v:?}"));
                }
            }
            (a, b) => failures.push(format!("seed {seed}: feasibility {:?} vs oracle {:?}", b.is_ok(), a.is_ok())),
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 5.0,
        format!(
            "{ORACLE_INSTANCES} instances ({feasible} feasible, {infeasible} infeasible), rel tol {ORACLE_REL_TOL:e}, {secs:.2} s < 5 s{}",
            failures.first().map_or(String::new(), |f| format!("; first failure: {f}"))
        ),
    )
}

fn contention() -> Outcome {
    let host = |cores: u32| {
        build_platform(&PlatformConfig {
            hosts_total: 1,
            regions: 1,
            cores_per_host: cores,
            ..PlatformConfig::default()
        })
        .unwrap()
        .hosts()[0]
        .clone()
    };
    // 10 Gflop/s per core, so 1e10 flop is T_comp = 1 s.
    let t_comp = 1e10;
    let mut checks = Vec::new();

    let mut s = HostCpuState::new(&host(24), 0.0);
    for k in 0..48 {
        s.start(0.0, TaskKey(k), t_comp);
    }
    let done = s.advance(10.0);
    checks.push(("48 on 24 cores -> 2.0 s", done.len() == 48 && done.iter().all(|c| (c.at - 2.0).abs() <= CPU_TOL)));

    let mut s = HostCpuState::new(&host(24), 0.0);
    for k in 0..24 {
        s.start(0.0, TaskKey(k), t_comp);
    }
    let done = s.advance(10.0);
    checks.push(("24 on 24 cores -> 1.0 s", done.len() == 24 && done.iter().all(|c| (c.at - 1.0).abs() <= CPU_TOL)));

    let mut s = HostCpuState::new(&host(1), 0.0);
    s.start(0.0, TaskKey(0), t_comp);
    let early = s.start(0.5, TaskKey(1), t_comp);
    let done = s.advance(10.0);
    let at = |k| done.iter().find(|c| c.key == TaskKey(k)).map(|c| c.at);
    let join_ok = early.is_empty()
        && at(0).is_some_and(|t| (t - 1.5).abs() <= CPU_TOL)
        && at(1).is_some_and(|t| (t - 2.0).abs() <= CPU_TOL);
    checks.push(("join at 0.5 s on 1 core -> 1.5 s / 2.0 s", join_ok));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!("{} advance_cpu examples, tol {CPU_TOL:e}{}", checks.len(), if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }),
    )
}

fn reconciliation() -> Outcome {
    // Client on host 0; one replica per stage spread over both regions.
    let platform = build_platform(&PlatformConfig {
        hosts_total: 4,
        regions: 2,
        ..PlatformConfig::default()
    })
    .unwrap();
    let replicas: Vec<ReplicaInstance> = [1, 2, 3]
        .iter()
        .enumerate()
        .map(|(s, &h)| ReplicaInstance {
            replica_id: ReplicaId(s as u32),
            service_id: ServiceId(s as u32),
            host_id: HostId(h),
            actor_pool: 24,
        })
        .collect();
    let chain = Arc::new(ServiceChain::uniform(3, 2e9, 3e6, 10.0).unwrap());
    let request = [Request {
        request_id: RequestId(0),
        chain,
        submit_time: 0.0,
        origin_host: HostId(0),
    }];

    let mut notes = Vec::new();
    let mut pass = true;

    // The closed form has no origin decision term, so it is not charged here.
    let dec = EngineOptions {
        charge_client_decision: false,
        ..EngineOptions::decentralized()
    };
    let rec = &engine::run(&platform, &replicas, &request, &dec).unwrap().records[0];
    let formula = latency_decentral(&rec.twl(), &rec.proc_latencies(), &rec.hop_sidecar_latencies()).unwrap();
    let got = rec.makespan().unwrap_or(f64::NAN);
    pass &= (got - formula).abs() <= RECONCILE_TOL;
    notes.push(format!("decentralized {got:.9} vs {formula:.9}"));

    let rec = &engine::run(&platform, &replicas, &request, &EngineOptions::decentralized()).unwrap().records[0];
    let formula = rec.decision_delay
        + latency_decentral(&rec.twl(), &rec.proc_latencies(), &rec.hop_sidecar_latencies()).unwrap();
    let got = rec.makespan().unwrap_or(f64::NAN);
    pass &= (got - formula).abs() <= RECONCILE_TOL;
    notes.push(format!("with origin decision {got:.9} vs {formula:.9}"));

    // All-hops convention: the client-to-first-stage transfer is charged on
    // top of the closed form's n-1 inter-stage transfers.
    let rec = &engine::run(&platform, &replicas, &request, &EngineOptions::centralized()).unwrap().records[0];
    let twl = rec.twl();
    let proc = rec.proc_latencies();
    let all_hops = latency_central(rec.sched_delay() + twl[0], &twl[1..], &proc).unwrap();
    let strict = latency_central(rec.sched_delay(), &twl[1..], &proc).unwrap();
    let got = rec.makespan().unwrap_or(f64::NAN);
    pass &= (got - all_hops).abs() <= RECONCILE_TOL;
    notes.push(format!("centralized {got:.9} vs {all_hops:.9} (strict form short by ingress {:.9})", got - strict));

    outcome(pass, format!("tol {RECONCILE_TOL:e}: {}", notes.join("; ")))
}

fn makespan_trend() -> Outcome {
    let started = Instant::now();
    let rates = [1.0, 10.0, 100.0, 1000.0, 1500.0];
    let sweep = match sweep_rates(&desk_config(), &rates) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let cen = sweep.series(SchedulerKind::Centralized);
    let dec = sweep.series(SchedulerKind::Decentralized);
    let (cen_lo, cen_hi) = (cen[0].makespan_mean_s, cen[cen.len() - 1].makespan_mean_s);
    let dec_hi = dec[dec.len() - 1].makespan_mean_s;
    let (cs, ds) = (sweep.spread(SchedulerKind::Centralized), sweep.spread(SchedulerKind::Decentralized));
    let a = cen_hi >= 2.0 * cen_lo;
    let b = ds < cs;
    let c = dec_hi < cen_hi;
    let secs = started.elapsed().as_secs_f64();
    outcome(
        a && b && c && secs < 600.0,
        format!(
            "rates {rates:?}: (a) central {cen_hi:.4} s >= 2 x {cen_lo:.4} s [{}]; (b) spread {ds:.3} < {cs:.3} [{}]; (c) top rate {dec_hi:.4} s < {cen_hi:.4} s [{}]; {secs:.1} s < 600 s",
            ok(a),
            ok(b),
            ok(c)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn complexity() -> Outcome {
    let started = Instant::now();
    let options = ComplexityOptions::default();
    let cells = match bench_complexity(&GRID_CHAINS, &GRID_REPLICAS, &options) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("bench failed: {e}")),
    };
    let at = |n: usize, r: usize| cells.iter().find(|c| c.chain_len == n && c.replicas == r).expect("grid cell");
    let mut violations = Vec::new();
    for &n in &GRID_CHAINS {
        for w in GRID_REPLICAS.windows(2) {
            let (lo, hi) = (at(n, w[0]).central_mean_s, at(n, w[1]).central_mean_s);
            if hi < (1.0 - MONOTONE_NOISE) * lo {
                violations.push(format!("n={n}: R {}->{} {lo:.3e}->{hi:.3e}", w[0], w[1]));
            }
        }
    }
    for &r in &GRID_REPLICAS {
        for w in GRID_CHAINS.windows(2) {
            let (lo, hi) = (at(w[0], r).central_mean_s, at(w[1], r).central_mean_s);
            if hi < (1.0 - MONOTONE_NOISE) * lo {
                violations.push(format!("R={r}: n {}->{} {lo:.3e}->{hi:.3e}", w[0], w[1]));
            }
        }
    }
    let r_max = *GRID_REPLICAS.last().unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &n in &GRID_CHAINS {
        for &y in &at(n, r_max).sidecar_hop_samples {
            xs.push(n as f64);
            ys.push(y);
        }
    }
    let reg = linear_regression(&xs, &ys).expect("enough samples");
    let flat = reg.ci_contains_zero();
    let secs = started.elapsed().as_secs_f64();
    outcome(
        violations.is_empty() && flat && secs < 300.0,
        format!(
            "{} cells x {} reps; central monotone within {:.0}% [{}]; per-hop slope at R={r_max} {:.3e} s/stage, 95% CI [{:.3e}, {:.3e}] [{}]; {secs:.1} s < 300 s{}",
            cells.len(),
            options.reps,
            MONOTONE_NOISE * 100.0,
            ok(violations.is_empty()),
            reg.slope,
            reg.slope_ci.0,
            reg.slope_ci.1,
            ok(flat),
            if violations.is_empty() { String::new() } else { format!("; violations: {violations:?}") }
        ),
    )
}

fn greedy_gap() -> Outcome {
    let policy = SidecarPolicy::default();
    let mut compared = 0;
    let mut walk_dropped = 0;
    let mut strict = Vec::new();
    let mut failures = Vec::new();
    for seed in 0..ORACLE_INSTANCES {
        let inst = random_instance(seed);
        let cands = inst.slices();
        let central = centralized_solve(&inst.chain, &cands, &inst.metrics, &inst.platform, inst.origin);
        let walk = sidecar_walk(&inst.chain, &cands, &inst.metrics, &inst.platform, inst.origin, &policy);
        match (central, walk) {
            (Ok(opt), Ok(hops)) => {
                compared += 1;
                let greedy: f64 = hops.iter().map(|h| h.carbon).sum();
                if greedy < opt.total_cost * (1.0 - ORACLE_REL_TOL) {
                    failures.push(format!("seed {seed}: greedy {greedy} < optimum {}", opt.total_cost));
                } else if greedy > opt.total_cost * (1.0 + ORACLE_REL_TOL) {
                    strict.push(seed);
                }
            }
            (Ok(_), Err(_)) => walk_dropped += 1,
            (Err(_), Ok(_)) => failures.push(format!("seed {seed}: sidecar found a path the solver calls infeasible")),
            (Err(_), Err(_)) => {}
        }
    }
    outcome(
        failures.is_empty() && !strict.is_empty(),
        format!(
            "{compared} instances compared ({walk_dropped} where the greedy walk drops), {} strict gaps (first witness seed {:?}){}",
            strict.len(),
            strict.first(),
            failures.first().map_or(String::new(), |f| format!("; first failure: {f}"))
        ),
    )
}

fn determinism_and_fifo() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut identical = true;
    for kind in SchedulerKind::BOTH {
        let mut cfg = desk_config().with_kind(kind).with_rate(300.0);
        cfg.workload.duration_s = 5.0;
        let mut bytes = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("{kind}-{i}.csv"));
            let out = run_scenario(&cfg).expect("run");
            write_requests_csv(&path, &rows(&out)).expect("csv");
            bytes.push(std::fs::read(&path).expect("read back"));
        }
        identical &= bytes[0] == bytes[1];
    }

    // Equal work everywhere, contention on: completions per replica must come
    // out in arrival order.
    let mut cfg = desk_config().with_rate(800.0);
    cfg.workload.duration_s = 3.0;
    cfg.workload.actors_per_replica = 4;
    cfg.scheduler.saturate_to_queue = true;
    let mut checked = 0usize;
    let mut out_of_order = 0usize;
    for kind in SchedulerKind::BOTH {
        let out = run_scenario(&cfg.with_kind(kind)).expect("run");
        let mut per: std::collections::BTreeMap<ReplicaId, Vec<(u64, f64)>> = Default::default();
        for r in &out.records {
            for h in &r.hops {
                if let Some(end) = h.t_exec_end {
                    per.entry(h.replica_id).or_default().push((h.arrival_seq, end));
                }
            }
        }
        for hops in per.values_mut() {
            hops.sort_by_key(|h| h.0);
            checked += hops.len();
            out_of_order += hops.windows(2).filter(|w| w[1].1 < w[0].1).count();
        }
    }
    outcome(
        identical && out_of_order == 0 && checked > 0,
        format!("repeated runs byte-identical [{}]; {checked} executions, {out_of_order} out of arrival order", ok(identical)),
    )
}

fn energy_endpoints() -> Outcome {
    let spec = build_platform(&PlatformConfig {
        hosts_total: 1,
        regions: 1,
        ..PlatformConfig::default()
    })
    .unwrap()
    .hosts()[0]
    .clone();
    let mut idle = HostCpuState::new(&spec, 0.0);
    idle.advance(100.0);
    let mut loaded = HostCpuState::new(&spec, 0.0);
    for k in 0..spec.cores as u64 {
        // Far more work than 100 s can finish.
        loaded.start(0.0, TaskKey(k), 1e15);
    }
    loaded.advance(100.0);
    let (i, l) = (idle.energy_j(), loaded.energy_j());
    outcome(i == 2000.0 && l == 20000.0, format!("idle {i} J (want 2000), loaded {l} J (want 20000), exact"))
}

fn staleness() -> Outcome {
    let mut cfg = desk_config().with_rate(120.0);
    cfg.metadata = MetadataConfig::strong();
    cfg.run.audit = true;
    let mut scenario = Scenario::build(&cfg).expect("scenario");
    scenario.requests.truncate(1000);
    let n = scenario.requests.len();
    let fresh = engine::run(&scenario.platform, &scenario.replicas, &scenario.requests, &cfg.engine_options()).expect("run");
    let none_differ = n == 1000 && fresh.stats.mismatches == 0 && fresh.stats.decisions > 0;

    let mut witness = None;
    for seed in 0..32 {
        let mut cfg = desk_config().with_rate(2000.0);
        cfg.workload.seed = seed;
        cfg.workload.duration_s = 2.0;
        cfg.metadata = MetadataConfig {
            metadata_interval_s: 0.0,
            intra_region_delay_s: 1.0,
            inter_region_delay_s: 1.0,
        };
        cfg.run.audit = true;
        let out = run_scenario(&cfg).expect("run");
        if out.stats.mismatches > 0 {
            witness = Some((seed, out.stats.mismatches, out.stats.decisions));
            break;
        }
    }
    outcome(
        none_differ && witness.is_some(),
        format!(
            "fresh: {n} requests, {} decisions, {} differ [{}]; 1 s delay burst witness (seed, differing, decisions) = {witness:?}",
            fresh.stats.decisions,
            fresh.stats.mismatches,
            ok(none_differ)
        ),
    )
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture arrive here too; they are ignored.
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "solver optimality oracle", solver_oracle),
        (2, "contention model", contention),
        (3, "latency reconciliation", reconciliation),
        (4, "makespan trend", makespan_trend),
        (5, "complexity surfaces", complexity),
        (6, "greedy-vs-optimal gap", greedy_gap),
        (7, "determinism and FIFO", determinism_and_fifo),
        (8, "energy endpoints", energy_endpoints),
        (9, "staleness effect", staleness),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let started = Instant::now();
        let o = check();
        failed += u32::from(!o.pass);
        println!(
            "criterion {id}: {} {name} ({:.1} s) - {}",
            if o.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
