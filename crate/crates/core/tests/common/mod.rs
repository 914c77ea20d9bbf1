//! Shared fixtures: small random scheduling instances and a brute-force
//! enumeration oracle for them.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use meshsim::metadata::{HostMetrics, ReplicaLoad};
use meshsim::platform::{build_platform, HostId, Platform, PlatformConfig};
use meshsim::sched::cost::{is_available, processing_estimate, stage_carbon};
use meshsim::workload::{ReplicaId, ReplicaInstance, ServiceChain, ServiceId, ServiceStage};

pub struct Instance {
    pub platform: Platform,
    pub chain: ServiceChain,
    pub candidates: Vec<Vec<ReplicaInstance>>,
    pub metrics: Vec<HostMetrics>,
    pub origin: HostId,
}

impl Instance {
    pub fn slices(&self) -> Vec<&[ReplicaInstance]> {
        self.candidates.iter().map(Vec::as_slice).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Best {
    pub cost: f64,
    pub latency: f64,
    pub replicas: Vec<ReplicaId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoCapacity(usize),
    LatencyBudget,
}

/// `(cost, latency)` of a full assignment, summed stage by stage.
pub fn path_cost(inst: &Instance, picks: &[&ReplicaInstance]) -> (f64, f64) {
    let mut cost = 0.0;
    let mut latency = 0.0;
    let mut here = inst.origin;
    for (stage, r) in picks.iter().enumerate() {
        let load = load_of(inst, r);
        cost += stage_carbon(&inst.platform, r.host_id, inst.chain.stages[stage].work);
        latency = latency
            + inst.platform.transfer_time(inst.chain.bytes_into(stage), here, r.host_id)
            + processing_estimate(&inst.platform, &inst.chain, stage, r, &load);
        here = r.host_id;
    }
    (cost, latency)
}

pub fn load_of(inst: &Instance, r: &ReplicaInstance) -> ReplicaLoad {
    inst.metrics[r.host_id.index()]
        .replica(r.replica_id)
        .copied()
        .expect("every replica has a load entry")
}

/// Tries every combination of available replicas.
pub fn enumerate(inst: &Instance) -> Result<Best, Verdict> {
    let avail: Vec<Vec<&ReplicaInstance>> = inst
        .candidates
        .iter()
        .map(|c| c.iter().filter(|r| is_available(&load_of(inst, r), r.actor_pool)).collect())
        .collect();
    if let Some(stage) = avail.iter().position(Vec::is_empty) {
        return Err(Verdict::NoCapacity(stage));
    }
    let mut best: Option<Best> = None;
    let mut idx = vec![0usize; avail.len()];
    loop {
        let picks: Vec<&ReplicaInstance> = idx.iter().zip(&avail).map(|(&i, a)| a[i]).collect();
        let (cost, latency) = path_cost(inst, &picks);
        if latency <= inst.chain.latency_budget && best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(Best {
                cost,
                latency,
                replicas: picks.iter().map(|r| r.replica_id).collect(),
            });
        }
        // Odometer step.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best.ok_or(Verdict::LatencyBudget);
            }
            idx[k] += 1;
            if idx[k] < avail[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Minimum latency over all available assignments, ignoring cost.
fn fastest(inst: &Instance) -> Option<f64> {
    let mut relaxed = Instance {
        platform: inst.platform.clone(),
        chain: inst.chain.clone(),
        candidates: inst.candidates.clone(),
        metrics: inst.metrics.clone(),
        origin: inst.origin,
    };
    relaxed.chain.latency_budget = f64::MAX;
    let avail: Vec<Vec<&ReplicaInstance>> = relaxed
        .candidates
        .iter()
        .map(|c| c.iter().filter(|r| is_available(&load_of(&relaxed, r), r.actor_pool)).collect())
        .collect();
    if avail.iter().any(Vec::is_empty) {
        return None;
    }
    let mut min = f64::INFINITY;
    let mut idx = vec![0usize; avail.len()];
    'outer: loop {
        let picks: Vec<&ReplicaInstance> = idx.iter().zip(&avail).map(|(&i, a)| a[i]).collect();
        min = min.min(path_cost(&relaxed, &picks).1);
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < avail[k].len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        return Some(min);
    }
}

/// n ≤ 4 stages, up to 6 replicas each, random intensities, work, payloads,
/// loads and budgets. Budgets straddle the fastest path so both verdicts
/// occur.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regions = rng.random_range(1..=4);
    let hosts = rng.random_range(regions.max(2)..=12);
    let platform = build_platform(&PlatformConfig {
        hosts_total: hosts,
        regions,
        cpu_gflops: rng.random_range(2.0..20.0),
        carbon_intensity: (0..regions).map(|_| rng.random_range(0.01..1.0)).collect(),
        ..PlatformConfig::default()
    })
    .expect("valid random platform");
    let n = rng.random_range(1..=4);
    let stages = (0..n)
        .map(|s| ServiceStage {
            service_id: ServiceId(s as u32),
            work: rng.random_range(1e8..5e9),
            payload_out: rng.random_range(0.0..5e6),
        })
        .collect();
    let mut chain = ServiceChain::new(stages, 1.0, rng.random_range(0.0..5e6)).expect("valid chain");
    let mut next_id = 0;
    let mut candidates = Vec::with_capacity(n);
    let mut metrics: Vec<HostMetrics> = platform.hosts().iter().map(|h| HostMetrics::idle(h.id, [])).collect();
    for s in 0..n {
        let r = rng.random_range(1..=6);
        let mut reps = Vec::with_capacity(r);
        for _ in 0..r {
            let host = HostId(rng.random_range(0..hosts as u32));
            let pool = rng.random_range(1..=4);
            let rep = ReplicaInstance {
                replica_id: ReplicaId(next_id),
                service_id: ServiceId(s as u32),
                host_id: host,
                actor_pool: pool,
            };
            next_id += 1;
            // Roughly one replica in five starts saturated.
            let busy = if rng.random_bool(0.2) { pool } else { rng.random_range(0..pool) };
            metrics[host.index()].replicas.push(ReplicaLoad {
                replica_id: rep.replica_id,
                busy_actors: busy,
                queue_length: rng.random_range(0..4),
            });
            reps.push(rep);
        }
        candidates.push(reps);
    }
    for m in &mut metrics {
        m.replicas.sort_by_key(|l| l.replica_id);
        m.refresh_totals();
    }
    let origin = HostId(rng.random_range(0..hosts as u32));
    let mut inst = Instance {
        platform,
        chain: chain.clone(),
        candidates,
        metrics,
        origin,
    };
    chain.latency_budget = match fastest(&inst) {
        Some(min) => min * rng.random_range(0.9..2.0),
        None => rng.random_range(0.5..10.0),
    };
    inst.chain = chain;
    inst
}
