//! Single-threaded discrete-event core.
//!
//! Requests move through their chain as a sequence of events: a placement
//! decision (one central solve, or one sidecar decision per hop), a flow-level
//! transfer, FIFO admission at the chosen replica, and fluid time-shared
//! execution on the replica's host. Everything is driven by a `(time, seq)`
//! ordered heap, so identical inputs give identical records.

pub mod cpu;
pub mod record;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use cpu::{advance_cpu, utilization_bound, Completion, CpuTask, HostCpuState, TaskKey};
pub use record::{DropCause, ExecutionRecord, HopRecord, Ingress, Status};

use crate::error::{ConfigError, EngineError, Error};
use crate::metadata::{HostMetrics, MetadataConfig, MetadataStore, MetricsView};
use crate::platform::{HostId, Platform};
use crate::sched::central::{centralized_solve_with, Assignment, Infeasible, SolverOptions};
use crate::sched::cost::{placement_cost, stage_carbon, ChainFloors};
use crate::sched::sidecar::{sidecar_next_hop, DropReason, HopQuery, SidecarPolicy};
use crate::workload::{ReplicaDirectory, ReplicaId, ReplicaInstance, Request, ServiceChain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Centralized,
    Decentralized,
}

impl SchedulerKind {
    pub const BOTH: [SchedulerKind; 2] = [SchedulerKind::Centralized, SchedulerKind::Decentralized];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Centralized => "centralized",
            SchedulerKind::Decentralized => "decentralized",
        }
    }
}

impl std::fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What happens when a policy finds no feasible placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropPolicy {
    #[default]
    Drop,
    /// Route to the lowest-latency-estimate candidate, ignoring capacity and
    /// budget.
    BestEffort,
}

/// How simulated decision latency is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DecisionTiming {
    /// Charged from the decision's work count; reproducible bit for bit.
    #[default]
    Modeled,
    /// Measured host wall time times `slowdown`. Not reproducible.
    WallClock { slowdown: f64 },
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub scheduler: SchedulerKind,
    pub policy: SidecarPolicy,
    pub metadata: MetadataConfig,
    pub solver: SolverOptions,
    pub drop_policy: DropPolicy,
    pub timing: DecisionTiming,
    /// Fixed part of every sidecar decision.
    pub sidecar_latency_s: f64,
    /// Modeled cost per candidate a sidecar inspects.
    pub sidecar_per_candidate_s: f64,
    /// Charge the origin's sidecar for the first-stage choice. Off, the
    /// first placement is free and only intermediate hops pay.
    pub charge_client_decision: bool,
    /// Host running the central scheduler.
    pub scheduler_host: HostId,
    /// Replaces the modeled client/scheduler round trip when set.
    pub scheduler_rtt: Option<f64>,
    /// Size of each control message to and from the scheduler.
    pub control_msg_bytes: f64,
    /// Fixed cost of one central solve.
    pub scheduler_overhead_s: f64,
    /// Modeled cost per label extension inside the solver.
    pub solver_per_op_s: f64,
    /// Also evaluate every sidecar decision against ground truth and count
    /// disagreements.
    pub audit: bool,
    /// Integrate host energy up to at least this time.
    pub horizon: Option<f64>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            scheduler: SchedulerKind::Decentralized,
            policy: SidecarPolicy::default(),
            metadata: MetadataConfig::default(),
            solver: SolverOptions::default(),
            drop_policy: DropPolicy::Drop,
            timing: DecisionTiming::Modeled,
            sidecar_latency_s: 100e-6,
            sidecar_per_candidate_s: 0.0,
            charge_client_decision: true,
            scheduler_host: HostId(0),
            scheduler_rtt: None,
            control_msg_bytes: 1e3,
            scheduler_overhead_s: 1e-3,
            solver_per_op_s: 1e-6,
            audit: false,
            horizon: None,
        }
    }
}

impl EngineOptions {
    pub fn centralized() -> Self {
        Self {
            scheduler: SchedulerKind::Centralized,
            ..Self::default()
        }
    }

    pub fn decentralized() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let non_neg = [
            ("sidecar_latency_s", self.sidecar_latency_s),
            ("sidecar_per_candidate_s", self.sidecar_per_candidate_s),
            ("control_msg_bytes", self.control_msg_bytes),
            ("scheduler_overhead_s", self.scheduler_overhead_s),
            ("solver_per_op_s", self.solver_per_op_s),
            ("scheduler_rtt", self.scheduler_rtt.unwrap_or(0.0)),
            ("w_lat", self.policy.w_lat),
        ];
        for (key, v) in non_neg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::new(key, "must be a finite value >= 0"));
            }
        }
        if let DecisionTiming::WallClock { slowdown } = self.timing {
            if !(slowdown >= 0.0 && slowdown.is_finite()) {
                return Err(ConfigError::new("slowdown", "must be >= 0"));
            }
        }
        self.metadata.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineStats {
    /// Simulated time at which energy accounting stops.
    pub end_time: f64,
    pub events: u64,
    /// Joules per host, idle floor included.
    pub energy_j: Vec<f64>,
    pub busy_core_seconds: Vec<f64>,
    /// Sidecar decisions taken (decentralized) or solves run (centralized).
    pub decisions: u64,
    /// Audited sidecar decisions that differ from the ground-truth choice.
    pub mismatches: u64,
    pub solver_extensions: u64,
}

impl EngineStats {
    pub fn total_energy_j(&self) -> f64 {
        self.energy_j.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// One per input request, in input order.
    pub records: Vec<ExecutionRecord>,
    pub stats: EngineStats,
}

/// Executes `requests` to completion.
pub fn run(
    platform: &Platform,
    replicas: &[ReplicaInstance],
    requests: &[Request],
    options: &EngineOptions,
) -> Result<RunOutput, Error> {
    options.validate()?;
    let mut sim = Sim::new(platform, replicas, requests, options)?;
    sim.run()?;
    Ok(sim.finish())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ev {
    Arrival(usize),
    SchedulerArrive(usize),
    SchedulerDone(usize),
    SidecarDecisionDone(usize),
    TransferDone(usize),
    ExecDone { host: usize, generation: u64 },
    Publish,
}

#[derive(Debug)]
struct Scheduled {
    time: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Default)]
struct Slot {
    busy: u32,
    queue: VecDeque<usize>,
    arrivals: u64,
}

#[derive(Debug, Clone, Copy)]
struct Target {
    replica: usize,
    host: HostId,
}

#[derive(Debug)]
enum Pending {
    None,
    Hop(Result<Target, DropCause>),
    Path(Result<Vec<Target>, DropCause>),
}

#[derive(Debug)]
struct ReqState {
    /// Stage the request is heading to or executing.
    stage: usize,
    target: Option<Target>,
    path: Vec<Target>,
    pending: Pending,
    floors: Arc<ChainFloors>,
    done: bool,
}

struct Sim<'a> {
    platform: &'a Platform,
    options: &'a EngineOptions,
    replicas: &'a [ReplicaInstance],
    directory: ReplicaDirectory,
    replica_index: HashMap<ReplicaId, usize>,
    requests: &'a [Request],

    now: f64,
    seq: u64,
    heap: BinaryHeap<Scheduled>,

    cpus: Vec<HostCpuState>,
    cpu_gen: Vec<u64>,
    tasks: Vec<(usize, usize)>,
    deferred: Vec<Completion>,
    slots: Vec<Slot>,

    truth: Vec<HostMetrics>,
    store: MetadataStore,

    records: Vec<ExecutionRecord>,
    states: Vec<ReqState>,
    outstanding: usize,

    sched_busy: bool,
    sched_queue: VecDeque<usize>,

    stats: EngineStats,
}

impl<'a> Sim<'a> {
    fn new(
        platform: &'a Platform,
        replicas: &'a [ReplicaInstance],
        requests: &'a [Request],
        options: &'a EngineOptions,
    ) -> Result<Self, Error> {
        let mut replica_index = HashMap::with_capacity(replicas.len());
        for (i, r) in replicas.iter().enumerate() {
            if !platform.contains(r.host_id) {
                return Err(ConfigError::new("replicas", format!("{} is on unknown host {}", r.replica_id, r.host_id)).into());
            }
            if r.actor_pool == 0 {
                return Err(ConfigError::new("actors_per_replica", "must be >= 1").into());
            }
            if replica_index.insert(r.replica_id, i).is_some() {
                return Err(ConfigError::new("replicas", format!("duplicate replica id {}", r.replica_id)).into());
            }
        }
        if options.scheduler == SchedulerKind::Centralized && !platform.contains(options.scheduler_host) {
            return Err(ConfigError::new("scheduler_host", "not a host of the platform").into());
        }
        let directory = ReplicaDirectory::new(replicas);

        let mut truth: Vec<HostMetrics> = platform.hosts().iter().map(|h| HostMetrics::idle(h.id, [])).collect();
        for r in replicas {
            truth[r.host_id.index()].replicas.push(crate::metadata::ReplicaLoad {
                replica_id: r.replica_id,
                busy_actors: 0,
                queue_length: 0,
            });
        }
        for m in &mut truth {
            m.replicas.sort_by_key(|r| r.replica_id);
        }

        let mut floors_cache: HashMap<*const ServiceChain, Arc<ChainFloors>> = HashMap::new();
        let mut records = Vec::with_capacity(requests.len());
        let mut states = Vec::with_capacity(requests.len());
        let mut last_submit = f64::NEG_INFINITY;
        for req in requests {
            if !platform.contains(req.origin_host) {
                return Err(ConfigError::new("origin_host", format!("unknown host {}", req.origin_host)).into());
            }
            if !(req.submit_time >= 0.0 && req.submit_time.is_finite()) {
                return Err(ConfigError::new("submit_time", "must be finite and >= 0").into());
            }
            last_submit = last_submit.max(req.submit_time);
            let floors = floors_cache
                .entry(Arc::as_ptr(&req.chain))
                .or_insert_with(|| Arc::new(ChainFloors::new(platform, &req.chain, &directory.for_chain(&req.chain))))
                .clone();
            records.push(ExecutionRecord {
                request_id: req.request_id,
                submit_time: req.submit_time,
                decision_delay: 0.0,
                centralized: options.scheduler == SchedulerKind::Centralized,
                ingress: None,
                hops: Vec::with_capacity(req.chain.len()),
                status: Status::Completed,
                t_complete: None,
                carbon_g: 0.0,
            });
            states.push(ReqState {
                stage: 0,
                target: None,
                path: Vec::new(),
                pending: Pending::None,
                floors,
                done: false,
            });
        }

        let store = MetadataStore::new(platform, replicas, options.metadata);
        let n_hosts = platform.hosts().len();
        let mut sim = Self {
            platform,
            options,
            replicas,
            directory,
            replica_index,
            requests,
            now: 0.0,
            seq: 0,
            heap: BinaryHeap::new(),
            cpus: platform.hosts().iter().map(|h| HostCpuState::new(h, 0.0)).collect(),
            cpu_gen: vec![0; n_hosts],
            tasks: Vec::new(),
            deferred: Vec::new(),
            slots: (0..replicas.len()).map(|_| Slot::default()).collect(),
            truth,
            store,
            records,
            states,
            outstanding: requests.len(),
            sched_busy: false,
            sched_queue: VecDeque::new(),
            stats: EngineStats::default(),
        };
        for (i, req) in requests.iter().enumerate() {
            sim.push(req.submit_time, Ev::Arrival(i));
        }
        if !requests.is_empty() && options.metadata.metadata_interval_s > 0.0 {
            sim.push(0.0, Ev::Publish);
        }
        Ok(sim)
    }

    fn push(&mut self, time: f64, ev: Ev) {
        self.seq += 1;
        self.heap.push(Scheduled {
            time,
            seq: self.seq,
            ev,
        });
    }

    fn run(&mut self) -> Result<(), Error> {
        while let Some(Scheduled { time, ev, .. }) = self.heap.pop() {
            if time < self.now {
                return Err(EngineError(format!("event at {time} dequeued after {}", self.now)).into());
            }
            self.now = time;
            self.stats.events += 1;
            match ev {
                Ev::Arrival(r) => self.on_arrival(r),
                Ev::SchedulerArrive(r) => {
                    self.sched_queue.push_back(r);
                    if !self.sched_busy {
                        self.start_solve();
                    }
                }
                Ev::SchedulerDone(r) => self.on_scheduler_done(r),
                Ev::SidecarDecisionDone(r) => {
                    let Pending::Hop(outcome) = std::mem::replace(&mut self.states[r].pending, Pending::None) else {
                        return Err(EngineError(format!("request {r} has no pending hop decision")).into());
                    };
                    self.apply_hop(r, outcome);
                }
                Ev::TransferDone(r) => self.on_transfer_done(r)?,
                Ev::ExecDone { host, generation } => {
                    if generation == self.cpu_gen[host] {
                        let done = self.cpus[host].advance(self.now);
                        self.deferred.extend(done);
                        self.cpu_dirty(host);
                    }
                }
                Ev::Publish => {
                    self.publish_all();
                    if self.outstanding > 0 {
                        self.push(self.now + self.options.metadata.metadata_interval_s, Ev::Publish);
                    }
                }
            }
            self.drain_completions()?;
        }
        if self.outstanding != 0 {
            return Err(EngineError(format!("{} requests never terminated", self.outstanding)).into());
        }
        Ok(())
    }

    fn finish(mut self) -> RunOutput {
        let end = self.options.horizon.map_or(self.now, |h| h.max(self.now));
        for cpu in &mut self.cpus {
            cpu.advance(end);
        }
        self.stats.end_time = end;
        self.stats.energy_j = self.cpus.iter().map(|c| c.energy_j()).collect();
        self.stats.busy_core_seconds = self.cpus.iter().map(|c| c.busy_core_seconds()).collect();
        RunOutput {
            records: self.records,
            stats: self.stats,
        }
    }

    // --- scheduling --------------------------------------------------------

    fn on_arrival(&mut self, r: usize) {
        match self.options.scheduler {
            SchedulerKind::Centralized => {
                let up = self.control_delay(self.requests[r].origin_host, self.options.scheduler_host);
                self.push(self.now + up, Ev::SchedulerArrive(r));
            }
            SchedulerKind::Decentralized => {
                let origin = self.requests[r].origin_host;
                self.decide_hop(r, 0, origin);
            }
        }
    }

    fn control_delay(&self, a: HostId, b: HostId) -> f64 {
        match self.options.scheduler_rtt {
            Some(rtt) => rtt / 2.0,
            None => self.platform.transfer_time(self.options.control_msg_bytes, a, b),
        }
    }

    fn start_solve(&mut self) {
        let Some(r) = self.sched_queue.pop_front() else {
            self.sched_busy = false;
            return;
        };
        self.sched_busy = true;
        let req = &self.requests[r];
        let mut chain = (*req.chain).clone();
        chain.latency_budget = req.chain.latency_budget - (self.now - req.submit_time);
        let candidates = self.directory.for_chain(&req.chain);

        let started = Instant::now();
        let solution = if chain.latency_budget > 0.0 {
            Some(centralized_solve_with(
                &chain,
                &candidates,
                &self.truth,
                self.platform,
                req.origin_host,
                self.options.solver,
            ))
        } else {
            None
        };
        let wall = started.elapsed().as_secs_f64();
        let extensions = solution.as_ref().map_or(0, |s| s.stats.extensions);
        self.stats.decisions += 1;
        self.stats.solver_extensions += extensions as u64;

        let outcome = match solution.map(|s| s.outcome) {
            Some(Ok(path)) => Ok(self.targets(&path.assignments)),
            Some(Err(Infeasible::NoCapacity { stage })) => Err(DropCause::NoCapacity { stage }),
            Some(Err(Infeasible::LatencyBudget)) | None => Err(DropCause::LatencyBudget { stage: 0 }),
        };
        let outcome = match (outcome, self.options.drop_policy) {
            (Err(_), DropPolicy::BestEffort) => Ok(self.best_effort_path(r, &candidates)),
            (o, _) => o,
        };
        let delay = match self.options.timing {
            DecisionTiming::Modeled => {
                self.options.scheduler_overhead_s + self.options.solver_per_op_s * extensions as f64
            }
            DecisionTiming::WallClock { slowdown } => self.options.scheduler_overhead_s + wall * slowdown,
        };
        self.states[r].pending = Pending::Path(outcome);
        self.push(self.now + delay, Ev::SchedulerDone(r));
    }

    fn targets(&self, assignments: &[Assignment]) -> Vec<Target> {
        assignments
            .iter()
            .map(|a| Target {
                replica: self.replica_index[&a.replica_id],
                host: a.host_id,
            })
            .collect()
    }

    fn best_effort_path(&self, r: usize, candidates: &[&[ReplicaInstance]]) -> Vec<Target> {
        let mut here = self.requests[r].origin_host;
        let mut path = Vec::with_capacity(candidates.len());
        for (stage, cands) in candidates.iter().enumerate() {
            let t = self.best_effort_hop(r, stage, here, cands, &self.truth);
            here = t.host;
            path.push(t);
        }
        path
    }

    fn best_effort_hop(
        &self,
        r: usize,
        stage: usize,
        here: HostId,
        cands: &[ReplicaInstance],
        view: &(impl MetricsView + ?Sized),
    ) -> Target {
        let chain = &self.requests[r].chain;
        let best = cands
            .iter()
            .min_by(|a, b| {
                let la = placement_cost(self.platform, chain, stage, here, a, view).est_latency_contrib;
                let lb = placement_cost(self.platform, chain, stage, here, b, view).est_latency_contrib;
                la.total_cmp(&lb).then(a.replica_id.cmp(&b.replica_id))
            })
            .expect("stage has candidates");
        Target {
            replica: self.replica_index[&best.replica_id],
            host: best.host_id,
        }
    }

    fn on_scheduler_done(&mut self, r: usize) {
        let outcome = match std::mem::replace(&mut self.states[r].pending, Pending::None) {
            Pending::Path(o) => o,
            _ => unreachable!("scheduler completion without a solve"),
        };
        let origin = self.requests[r].origin_host;
        let decided = self.now + self.control_delay(self.options.scheduler_host, origin);
        self.records[r].decision_delay = decided - self.requests[r].submit_time;
        match outcome {
            Ok(path) => {
                let first = path[0];
                self.states[r].path = path;
                self.send(r, 0, origin, first, decided);
            }
            Err(cause) => self.terminate(r, Status::Dropped(cause)),
        }
        self.start_solve();
    }

    /// Picks the replica for `stage` from the sidecar at `here`.
    fn decide_hop(&mut self, r: usize, stage: usize, here: HostId) {
        let req = &self.requests[r];
        let chain: &ServiceChain = &req.chain;
        let candidates = self.directory.of(chain.stages[stage].service_id);
        let query = HopQuery {
            stage,
            chain,
            candidates,
            here,
            remaining_budget: chain.latency_budget - (self.now - req.submit_time),
            floor_after: self.states[r].floors.after(stage),
        };
        let started = Instant::now();
        let view = self.store.view(here, self.now);
        let decision = sidecar_next_hop(&query, &view, self.platform, &self.options.policy);
        let wall = started.elapsed().as_secs_f64();
        self.stats.decisions += 1;
        if self.options.audit {
            let truth = sidecar_next_hop(&query, &self.truth, self.platform, &self.options.policy);
            let same = match (&decision, &truth) {
                (Ok(a), Ok(b)) => a.replica_id == b.replica_id,
                (Err(a), Err(b)) => a == b,
                _ => false,
            };
            if !same {
                self.stats.mismatches += 1;
            }
        }

        let evaluated = decision.as_ref().map_or(candidates.len(), |d| d.evaluated);
        let outcome = match decision {
            Ok(d) => Ok(Target {
                replica: self.replica_index[&d.replica_id],
                host: d.host_id,
            }),
            Err(reason) => match self.options.drop_policy {
                DropPolicy::BestEffort if !candidates.is_empty() => {
                    let view = self.store.view(here, self.now);
                    Ok(self.best_effort_hop(r, stage, here, candidates, &view))
                }
                _ => Err(match reason {
                    DropReason::NoCandidates => DropCause::NoCandidates { stage },
                    DropReason::NoCapacity => DropCause::NoCapacity { stage },
                    DropReason::LatencyBudget => DropCause::LatencyBudget { stage },
                }),
            },
        };

        let charged = stage > 0 || self.options.charge_client_decision;
        let delay = if !charged {
            0.0
        } else {
            match self.options.timing {
                DecisionTiming::Modeled => {
                    self.options.sidecar_latency_s + self.options.sidecar_per_candidate_s * evaluated as f64
                }
                DecisionTiming::WallClock { slowdown } => self.options.sidecar_latency_s + wall * slowdown,
            }
        };
        if stage == 0 {
            self.records[r].decision_delay = delay;
        }
        if delay > 0.0 {
            self.states[r].pending = Pending::Hop(outcome);
            self.push(self.now + delay, Ev::SidecarDecisionDone(r));
        } else {
            self.apply_hop(r, outcome);
        }
    }

    fn apply_hop(&mut self, r: usize, outcome: Result<Target, DropCause>) {
        match outcome {
            Ok(target) => {
                let stage = self.states[r].stage;
                let from = if stage == 0 {
                    self.requests[r].origin_host
                } else {
                    self.states[r].target.expect("previous stage placed").host
                };
                if let Some(h) = self.records[r].hops.last_mut() {
                    h.t_sidecar_done = Some(self.now);
                }
                self.send(r, stage, from, target, self.now);
            }
            Err(cause) => self.terminate(r, Status::Dropped(cause)),
        }
    }

    /// Starts the transfer into `stage` at `at`.
    fn send(&mut self, r: usize, stage: usize, from: HostId, to: Target, at: f64) {
        let bytes = self.requests[r].chain.bytes_into(stage);
        let end = at + self.platform.transfer_time(bytes, from, to.host);
        if stage == 0 {
            self.records[r].ingress = Some(Ingress {
                t_decided: at,
                t_transfer_start: at,
                t_transfer_end: end,
            });
        } else {
            let hop = self.records[r].hops.last_mut().expect("previous hop");
            hop.t_transfer_start = Some(at);
            hop.t_transfer_end = Some(end);
        }
        let st = &mut self.states[r];
        st.stage = stage;
        st.target = Some(to);
        self.push(end, Ev::TransferDone(r));
    }

    // --- execution ---------------------------------------------------------

    fn on_transfer_done(&mut self, r: usize) -> Result<(), Error> {
        let st = &self.states[r];
        let Some(target) = st.target else {
            return Err(EngineError(format!("request {r} arrived without a target")).into());
        };
        let replica = &self.replicas[target.replica];
        let arrival_seq = self.slots[target.replica].arrivals;
        self.slots[target.replica].arrivals += 1;
        self.records[r].hops.push(HopRecord {
            stage: st.stage,
            replica_id: replica.replica_id,
            host_id: replica.host_id,
            arrival_seq,
            t_queue_in: self.now,
            t_admit: f64::NAN,
            t_exec_start: f64::NAN,
            t_exec_end: None,
            t_sidecar_done: None,
            t_transfer_start: None,
            t_transfer_end: None,
        });
        let slot = &mut self.slots[target.replica];
        if slot.busy < replica.actor_pool {
            self.start_exec(r, target.replica);
        } else {
            slot.queue.push_back(r);
            self.touch(target.replica);
        }
        Ok(())
    }

    fn start_exec(&mut self, r: usize, replica: usize) {
        let host = self.replicas[replica].host_id.index();
        self.slots[replica].busy += 1;
        let hop = self.records[r].hops.last_mut().expect("hop recorded on arrival");
        hop.t_admit = self.now;
        hop.t_exec_start = self.now;
        let key = TaskKey(self.tasks.len() as u64);
        self.tasks.push((r, replica));
        let work = self.requests[r].chain.stages[self.states[r].stage].work;
        let done = self.cpus[host].start(self.now, key, work);
        self.deferred.extend(done);
        self.cpu_dirty(host);
        self.touch(replica);
    }

    fn cpu_dirty(&mut self, host: usize) {
        self.cpu_gen[host] += 1;
        if let Some(t) = self.cpus[host].next_completion() {
            let generation = self.cpu_gen[host];
            self.push(t.max(self.now), Ev::ExecDone { host, generation });
        }
    }

    fn drain_completions(&mut self) -> Result<(), Error> {
        while !self.deferred.is_empty() {
            let batch = std::mem::take(&mut self.deferred);
            for c in batch {
                self.finish_exec(c)?;
            }
        }
        Ok(())
    }

    fn finish_exec(&mut self, c: Completion) -> Result<(), Error> {
        let (r, replica) = self.tasks[c.key.0 as usize];
        let spec = &self.replicas[replica];
        let host = spec.host_id;
        let stage = self.states[r].stage;
        let chain = self.requests[r].chain.clone();
        let hop = self.records[r]
            .hops
            .last_mut()
            .ok_or_else(|| EngineError(format!("completion for request {r} with no hop")))?;
        hop.t_exec_end = Some(c.at);
        self.records[r].carbon_g += stage_carbon(self.platform, host, chain.stages[stage].work);

        let slot = &mut self.slots[replica];
        slot.busy -= 1;
        if let Some(next) = slot.queue.pop_front() {
            self.start_exec(next, replica);
        } else {
            self.touch(replica);
        }

        if stage + 1 == chain.len() {
            self.records[r].t_complete = Some(c.at);
            self.terminate(r, Status::Completed);
            return Ok(());
        }
        match self.options.scheduler {
            SchedulerKind::Centralized => {
                let next = self.states[r].path[stage + 1];
                self.send(r, stage + 1, host, next, self.now);
            }
            SchedulerKind::Decentralized => {
                self.states[r].stage = stage + 1;
                self.decide_hop(r, stage + 1, host);
            }
        }
        Ok(())
    }

    fn terminate(&mut self, r: usize, status: Status) {
        let st = &mut self.states[r];
        debug_assert!(!st.done, "request terminated twice");
        st.done = true;
        self.records[r].status = status;
        self.outstanding -= 1;
    }

    // --- metrics -----------------------------------------------------------

    /// Mirrors a replica's live state into ground truth and, when publishing
    /// on every change, into the store.
    fn touch(&mut self, replica: usize) {
        let spec = &self.replicas[replica];
        let host = spec.host_id.index();
        let slot = &self.slots[replica];
        let m = &mut self.truth[host];
        if let Some(load) = m.replica_mut(spec.replica_id) {
            load.busy_actors = slot.busy;
            load.queue_length = slot.queue.len() as u32;
        }
        m.refresh_totals();
        m.cpu_utilization = self.cpus[host].utilization();
        m.measured_at = self.now;
        if self.options.metadata.metadata_interval_s == 0.0 {
            self.store.publish(m.clone(), self.now);
        }
    }

    fn publish_all(&mut self) {
        for host in 0..self.truth.len() {
            let m = &mut self.truth[host];
            m.cpu_utilization = self.cpus[host].utilization();
            m.measured_at = self.now;
            self.store.publish(m.clone(), self.now);
        }
    }
}
