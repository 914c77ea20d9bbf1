//! Centralized scheduler: exact minimum-carbon chain placement under a latency
//! budget.
//!
//! A request's chain induces a layered graph: one layer per stage, one node per
//! replica with free actor capacity, and an edge between every pair of nodes
//! in consecutive layers (n·R nodes, n·R² edges). Choosing one node per layer
//! is exactly the assignment encoded by binary host-selection variables, so a
//! budget-constrained shortest path over this graph is the MILP optimum for
//! chain-shaped requests.
//!
//! The search is label-setting over the layers in order. A label is
//! `(cost, latency)` for a partial path ending at a node; a label dominates
//! another at the same node when it is no worse in both. Only non-dominated
//! labels survive, and a label is dropped as soon as its latency plus the
//! admissible floor of the remaining stages exceeds the budget.

use crate::metadata::MetricsView;
use crate::platform::{HostId, Platform};
use crate::sched::cost::{is_available, processing_estimate, stage_carbon, ChainFloors};
use crate::workload::{ReplicaId, ReplicaInstance, RequestId, ServiceChain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Off only for testing: keeps every budget-feasible label.
    pub prune_dominated: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            prune_dominated: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub stage: usize,
    pub replica_id: ReplicaId,
    pub host_id: HostId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPath {
    pub request_id: Option<RequestId>,
    pub assignments: Vec<Assignment>,
    /// gCO2.
    pub total_cost: f64,
    /// Seconds, estimated end to end from the origin.
    pub est_latency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasible {
    /// No replica of this stage has a free actor.
    NoCapacity { stage: usize },
    /// Every capacity-feasible path exceeds the latency budget.
    LatencyBudget,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub labels: usize,
    /// Label extensions across edges, the unit of solver work.
    pub extensions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub outcome: Result<ExecutionPath, Infeasible>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    replica: usize,
    host: HostId,
    cost: f64,
    latency: f64,
}

#[derive(Debug, Clone, Copy)]
struct Label {
    cost: f64,
    latency: f64,
    host: HostId,
    node: u32,
    prev: u32,
}

const NO_PREV: u32 = u32::MAX;

pub fn centralized_solve(
    chain: &ServiceChain,
    candidates: &[&[ReplicaInstance]],
    metrics: &(impl MetricsView + ?Sized),
    platform: &Platform,
    origin: HostId,
) -> Result<ExecutionPath, Infeasible> {
    centralized_solve_with(chain, candidates, metrics, platform, origin, SolverOptions::default()).outcome
}

pub fn centralized_solve_with(
    chain: &ServiceChain,
    candidates: &[&[ReplicaInstance]],
    metrics: &(impl MetricsView + ?Sized),
    platform: &Platform,
    origin: HostId,
    options: SolverOptions,
) -> Solution {
    let mut stats = SolveStats::default();
    let n = chain.len();
    let floors = ChainFloors::new(platform, chain, candidates);
    let budget = chain.latency_budget;

    // "Find available hosts" for every stage before solving.
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(n);
    for stage in 0..n {
        let reps = candidates.get(stage).copied().unwrap_or(&[]);
        let nodes: Vec<Node> = reps
            .iter()
            .enumerate()
            .filter_map(|(idx, r)| {
                let load = metrics.replica_load(r.host_id, r.replica_id);
                is_available(&load, r.actor_pool).then(|| Node {
                    replica: idx,
                    host: r.host_id,
                    cost: stage_carbon(platform, r.host_id, chain.stages[stage].work),
                    latency: processing_estimate(platform, chain, stage, r, &load),
                })
            })
            .collect();
        if nodes.is_empty() {
            return Solution {
                outcome: Err(Infeasible::NoCapacity { stage }),
                stats,
            };
        }
        layers.push(nodes);
    }

    // history[i] holds the surviving labels of layer i, sorted by (cost, latency).
    let mut history: Vec<Vec<Label>> = Vec::with_capacity(n);
    for (stage, nodes) in layers.iter().enumerate() {
        let frontier: &[Label] = history.last().map_or(&[], Vec::as_slice);
        let mut scratch: Vec<Label> = Vec::new();
        let bytes = chain.bytes_into(stage);
        let floor = floors.after(stage);
        for (j, node) in nodes.iter().enumerate() {
            let start = scratch.len();
            let mut best = f64::INFINITY;
            let mut extend = |cost: f64, latency: f64, prev: u32, scratch: &mut Vec<Label>| {
                stats.extensions += 1;
                if latency + floor > budget {
                    return;
                }
                let label = Label {
                    cost,
                    latency,
                    host: node.host,
                    node: j as u32,
                    prev,
                };
                if !options.prune_dominated {
                    scratch.push(label);
                    return;
                }
                if latency >= best {
                    return;
                }
                // Incoming labels are swept in ascending cost, so only an
                // equal-cost predecessor can be dominated by the newcomer.
                if scratch.len() > start && scratch.last().is_some_and(|l| l.cost == cost) {
                    scratch.pop();
                }
                scratch.push(label);
                best = latency;
            };
            if stage == 0 {
                let latency = platform.transfer_time(bytes, origin, node.host) + node.latency;
                extend(node.cost, latency, NO_PREV, &mut scratch);
            } else {
                for (k, prev) in frontier.iter().enumerate() {
                    let latency = prev.latency
                        + platform.transfer_time(bytes, prev.host, node.host)
                        + node.latency;
                    extend(prev.cost + node.cost, latency, k as u32, &mut scratch);
                }
            }
        }
        if scratch.is_empty() {
            return Solution {
                outcome: Err(Infeasible::LatencyBudget),
                stats,
            };
        }
        stats.labels += scratch.len();
        scratch.sort_by(|a, b| {
            a.cost
                .total_cmp(&b.cost)
                .then(a.latency.total_cmp(&b.latency))
                .then(a.node.cmp(&b.node))
        });
        history.push(scratch);
    }

    let best = history[n - 1][0];
    let mut assignments = vec![
        Assignment {
            stage: 0,
            replica_id: ReplicaId(0),
            host_id: HostId(0),
        };
        n
    ];
    let mut label = best;
    for stage in (0..n).rev() {
        let node = layers[stage][label.node as usize];
        let replica = &candidates[stage][node.replica];
        assignments[stage] = Assignment {
            stage,
            replica_id: replica.replica_id,
            host_id: replica.host_id,
        };
        if stage > 0 {
            label = history[stage - 1][label.prev as usize];
        }
    }
    Solution {
        outcome: Ok(ExecutionPath {
            request_id: None,
            assignments,
            total_cost: best.cost,
            est_latency: best.latency,
        }),
        stats,
    }
}
