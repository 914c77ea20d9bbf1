//! Cost and latency estimates shared by both scheduling policies.
//!
//! The carbon term of a placement is the dynamic energy of the stage's work on
//! the chosen host times its region's carbon intensity. The latency estimate
//! is route transfer + uncontended compute + a queue-wait guess from the
//! observed queue length; contention during execution is not forecast.

use crate::metadata::{MetricsView, ReplicaLoad};
use crate::platform::{exec_carbon, HostId, Platform};
use crate::workload::{ReplicaInstance, ServiceChain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementCost {
    /// gCO2 attributed to running the stage on the candidate.
    pub carbon: f64,
    /// Seconds: transfer into the stage plus its estimated processing.
    pub est_latency_contrib: f64,
}

pub fn stage_carbon(platform: &Platform, host: HostId, work: f64) -> f64 {
    let spec = platform.host(host);
    exec_carbon(spec, platform.region_of(host), spec.compute_time(work))
}

/// `queue_length * T_comp / min(A, C)`.
pub fn queue_wait_estimate(load: &ReplicaLoad, actor_pool: u32, cores: u32, t_comp: f64) -> f64 {
    let servers = actor_pool.min(cores).max(1) as f64;
    load.queue_length as f64 * t_comp / servers
}

pub fn is_available(load: &ReplicaLoad, actor_pool: u32) -> bool {
    load.busy_actors < actor_pool
}

/// Uncontended compute plus queue-wait guess at `replica` for stage `stage`.
pub fn processing_estimate(
    platform: &Platform,
    chain: &ServiceChain,
    stage: usize,
    replica: &ReplicaInstance,
    load: &ReplicaLoad,
) -> f64 {
    let host = platform.host(replica.host_id);
    let t_comp = host.compute_time(chain.stages[stage].work);
    t_comp + queue_wait_estimate(load, replica.actor_pool, host.cores, t_comp)
}

pub fn placement_cost(
    platform: &Platform,
    chain: &ServiceChain,
    stage: usize,
    from: HostId,
    replica: &ReplicaInstance,
    metrics: &(impl MetricsView + ?Sized),
) -> PlacementCost {
    let load = metrics.replica_load(replica.host_id, replica.replica_id);
    PlacementCost {
        carbon: stage_carbon(platform, replica.host_id, chain.stages[stage].work),
        est_latency_contrib: platform.transfer_time(chain.bytes_into(stage), from, replica.host_id)
            + processing_estimate(platform, chain, stage, replica, &load),
    }
}

/// Admissible lower bounds on the latency still ahead of each stage.
///
/// `after(i)` sums, over stages `i+1..n`, the smallest uncontended compute
/// time among that stage's candidates. Transfers are bounded by zero since a
/// co-located replica may exist.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFloors {
    suffix: Vec<f64>,
}

impl ChainFloors {
    pub fn new(platform: &Platform, chain: &ServiceChain, candidates: &[&[ReplicaInstance]]) -> Self {
        let n = chain.len();
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let work = chain.stages[i].work;
            let min = candidates
                .get(i)
                .into_iter()
                .flat_map(|c| c.iter())
                .map(|r| platform.host(r.host_id).compute_time(work))
                .fold(f64::INFINITY, f64::min);
            suffix[i] = suffix[i + 1] + if min.is_finite() { min } else { 0.0 };
        }
        Self { suffix }
    }

    /// Floor for stages strictly after `stage`.
    pub fn after(&self, stage: usize) -> f64 {
        self.suffix[(stage + 1).min(self.suffix.len() - 1)]
    }

    /// Floor for the stages from `stage` on.
    pub fn from(&self, stage: usize) -> f64 {
        self.suffix[stage.min(self.suffix.len() - 1)]
    }
}
