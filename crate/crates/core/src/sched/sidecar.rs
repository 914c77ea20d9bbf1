//! Decentralized scheduler: one greedy next-hop choice per sidecar.
//!
//! Candidates are filtered on observed actor availability and on whether the
//! hop estimate plus the admissible floor of the remaining chain still fits the
//! remaining budget. Survivors are ranked by
//! `carbon + w_lat * est_hop_latency`, ties to the lowest replica id.
//! Work per call is one pass over the stage's candidates.

use serde::{Deserialize, Serialize};

use crate::metadata::MetricsView;
use crate::platform::{HostId, Platform};
use crate::sched::cost::{is_available, placement_cost, ChainFloors};
use crate::workload::{ReplicaId, ReplicaInstance, ServiceChain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SidecarPolicy {
    /// gCO2 charged per second of estimated hop latency.
    pub w_lat: f64,
    /// When every candidate is saturated, queue at the best one that still
    /// passes the latency filter instead of dropping.
    pub saturate_to_queue: bool,
}

impl Default for SidecarPolicy {
    fn default() -> Self {
        Self {
            w_lat: 1.0,
            saturate_to_queue: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopDecision {
    pub stage: usize,
    pub replica_id: ReplicaId,
    pub host_id: HostId,
    pub carbon: f64,
    pub est_latency: f64,
    pub score: f64,
    /// Candidates inspected; the unit of decision work.
    pub evaluated: usize,
    /// The chosen replica had no free actor in the view.
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    NoCandidates,
    NoCapacity,
    LatencyBudget,
}

#[derive(Debug, Clone, Copy)]
pub struct HopQuery<'a> {
    pub stage: usize,
    pub chain: &'a ServiceChain,
    pub candidates: &'a [ReplicaInstance],
    /// Host whose sidecar decides.
    pub here: HostId,
    pub remaining_budget: f64,
    /// Admissible latency floor for the stages after this one.
    pub floor_after: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pick {
    score: f64,
    replica: ReplicaId,
    host: HostId,
    carbon: f64,
    latency: f64,
}

impl Pick {
    fn better_than(&self, other: &Option<Pick>) -> bool {
        match other {
            None => true,
            Some(o) => (self.score, self.replica) < (o.score, o.replica),
        }
    }
}

pub fn sidecar_next_hop(
    query: &HopQuery<'_>,
    view: &(impl MetricsView + ?Sized),
    platform: &Platform,
    policy: &SidecarPolicy,
) -> Result<HopDecision, DropReason> {
    if query.candidates.is_empty() {
        return Err(DropReason::NoCandidates);
    }
    let mut best: Option<Pick> = None;
    let mut best_saturated: Option<Pick> = None;
    let mut any_available = false;
    for r in query.candidates {
        let load = view.replica_load(r.host_id, r.replica_id);
        let available = is_available(&load, r.actor_pool);
        any_available |= available;
        if !available && !policy.saturate_to_queue {
            continue;
        }
        let cost = placement_cost(platform, query.chain, query.stage, query.here, r, view);
        if cost.est_latency_contrib + query.floor_after > query.remaining_budget {
            continue;
        }
        let pick = Pick {
            score: cost.carbon + policy.w_lat * cost.est_latency_contrib,
            replica: r.replica_id,
            host: r.host_id,
            carbon: cost.carbon,
            latency: cost.est_latency_contrib,
        };
        let slot = if available { &mut best } else { &mut best_saturated };
        if pick.better_than(slot) {
            *slot = Some(pick);
        }
    }
    let (pick, saturated) = match (best, best_saturated) {
        (Some(p), _) => (p, false),
        (None, Some(p)) => (p, true),
        (None, None) if any_available || policy.saturate_to_queue => {
            return Err(DropReason::LatencyBudget)
        }
        (None, None) => return Err(DropReason::NoCapacity),
    };
    Ok(HopDecision {
        stage: query.stage,
        replica_id: pick.replica,
        host_id: pick.host,
        carbon: pick.carbon,
        est_latency: pick.latency,
        score: pick.score,
        evaluated: query.candidates.len(),
        saturated,
    })
}

/// Runs the sidecar policy hop by hop against a fixed view, charging each
/// hop's estimated latency against the budget. This is the full decentralized
/// decision sequence for one request without simulating time.
pub fn sidecar_walk(
    chain: &ServiceChain,
    candidates: &[&[ReplicaInstance]],
    view: &(impl MetricsView + ?Sized),
    platform: &Platform,
    origin: HostId,
    policy: &SidecarPolicy,
) -> Result<Vec<HopDecision>, (usize, DropReason)> {
    let floors = ChainFloors::new(platform, chain, candidates);
    walk_with_floors(chain, candidates, view, platform, origin, policy, &floors)
}

pub fn walk_with_floors(
    chain: &ServiceChain,
    candidates: &[&[ReplicaInstance]],
    view: &(impl MetricsView + ?Sized),
    platform: &Platform,
    origin: HostId,
    policy: &SidecarPolicy,
    floors: &ChainFloors,
) -> Result<Vec<HopDecision>, (usize, DropReason)> {
    let mut here = origin;
    let mut elapsed = 0.0;
    let mut hops = Vec::with_capacity(chain.len());
    for stage in 0..chain.len() {
        let query = HopQuery {
            stage,
            chain,
            candidates: candidates.get(stage).copied().unwrap_or(&[]),
            here,
            remaining_budget: chain.latency_budget - elapsed,
            floor_after: floors.after(stage),
        };
        let hop = sidecar_next_hop(&query, view, platform, policy).map_err(|e| (stage, e))?;
        elapsed += hop.est_latency;
        here = hop.host_id;
        hops.push(hop);
    }
    Ok(hops)
}
