use crate::platform::HostId;
use crate::workload::{ReplicaId, RequestId};

/// The leg that brings the request from its origin to the first stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ingress {
    /// First-stage placement known at the origin (after `L_sched` for the
    /// centralized scheduler, after the origin sidecar's decision otherwise).
    pub t_decided: f64,
    pub t_transfer_start: f64,
    pub t_transfer_end: f64,
}

/// One service execution, followed by the decision and transfer towards the
/// next stage (absent on the final stage).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopRecord {
    pub stage: usize,
    pub replica_id: ReplicaId,
    pub host_id: HostId,
    /// Position in the replica's arrival sequence; breaks `t_queue_in` ties.
    pub arrival_seq: u64,
    pub t_queue_in: f64,
    pub t_admit: f64,
    pub t_exec_start: f64,
    pub t_exec_end: Option<f64>,
    pub t_sidecar_done: Option<f64>,
    pub t_transfer_start: Option<f64>,
    pub t_transfer_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropCause {
    /// Centralized solver found no capacity at this stage.
    NoCapacity { stage: usize },
    /// No placement fits the latency budget.
    LatencyBudget { stage: usize },
    /// The stage has no replicas at all.
    NoCandidates { stage: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    Dropped(DropCause),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionRecord {
    pub request_id: RequestId,
    pub submit_time: f64,
    /// Time spent before the first-stage placement was known: scheduler
    /// round trip and queueing for centralized, the origin sidecar decision
    /// for decentralized.
    pub decision_delay: f64,
    pub centralized: bool,
    pub ingress: Option<Ingress>,
    pub hops: Vec<HopRecord>,
    pub status: Status,
    pub t_complete: Option<f64>,
    /// gCO2 of the stages that executed.
    pub carbon_g: f64,
}

impl ExecutionRecord {
    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    pub fn makespan(&self) -> Option<f64> {
        self.t_complete.map(|t| t - self.submit_time)
    }

    /// `L_sched`; zero for decentralized runs.
    pub fn sched_delay(&self) -> f64 {
        if self.centralized {
            self.decision_delay
        } else {
            0.0
        }
    }

    /// Transmission latencies before each stage that was reached, `TWL_1..`.
    pub fn twl(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.hops.len());
        if let Some(i) = &self.ingress {
            out.push(i.t_transfer_end - i.t_transfer_start);
        }
        for h in &self.hops {
            if let (Some(s), Some(e)) = (h.t_transfer_start, h.t_transfer_end) {
                out.push(e - s);
            }
        }
        out
    }

    /// Arrival at the replica to end of execution, queueing included.
    pub fn proc_latencies(&self) -> Vec<f64> {
        self.hops
            .iter()
            .filter_map(|h| h.t_exec_end.map(|e| e - h.t_queue_in))
            .collect()
    }

    /// Per-intermediate-hop sidecar delay, `L_sidecar_1..L_sidecar_{n-1}`.
    pub fn hop_sidecar_latencies(&self) -> Vec<f64> {
        self.hops
            .iter()
            .filter_map(|h| match (h.t_exec_end, h.t_sidecar_done) {
                (Some(e), Some(d)) => Some(d - e),
                _ => None,
            })
            .collect()
    }

    /// Every sidecar delay charged to the request, the origin's included.
    pub fn total_sidecar(&self) -> f64 {
        let origin = if self.centralized { 0.0 } else { self.decision_delay };
        origin + self.hop_sidecar_latencies().iter().sum::<f64>()
    }

    /// Checks that per-hop timestamps never run backwards.
    pub fn is_monotone(&self) -> bool {
        let mut last = self.submit_time;
        let mut ok = |t: f64| {
            let fine = t >= last;
            last = t;
            fine
        };
        if let Some(i) = &self.ingress {
            if !(ok(i.t_decided) && ok(i.t_transfer_start) && ok(i.t_transfer_end)) {
                return false;
            }
        }
        for h in &self.hops {
            let stamps = [
                Some(h.t_queue_in),
                Some(h.t_admit),
                Some(h.t_exec_start),
                h.t_exec_end,
                h.t_sidecar_done,
                h.t_transfer_start,
                h.t_transfer_end,
            ];
            for t in stamps.into_iter().flatten() {
                if !ok(t) {
                    return false;
                }
            }
        }
        true
    }
}
