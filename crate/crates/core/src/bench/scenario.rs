//! One configured run: build, place, generate, execute, aggregate.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::config::ScenarioConfig;
use crate::bench::stats::{mean, nearest_rank};
use crate::engine::{self, EngineStats, ExecutionRecord, SchedulerKind, Status};
use crate::error::Error;
use crate::platform::{build_platform, HostId, Platform};
use crate::workload::{derive_seed, generate_arrivals, ReplicaInstance, ReplicaPlacer, Request, ServiceId};

const PLACEMENT_STREAM: u64 = 1;
const ARRIVAL_STREAM: u64 = 2;

/// Everything a run consumes, built deterministically from a config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub platform: Platform,
    pub replicas: Vec<ReplicaInstance>,
    pub requests: Vec<Request>,
}

impl Scenario {
    /// Placement and arrivals depend only on the workload seed, so both
    /// schedulers see the same replicas and the same request stream.
    pub fn build(config: &ScenarioConfig) -> Result<Self, Error> {
        config.validate()?;
        let platform = build_platform(&config.platform)?;
        let w = &config.workload;
        let client = HostId(config.run.client_host);
        let mut placer = ReplicaPlacer::new(&platform, derive_seed(w.seed, PLACEMENT_STREAM))
            .exclude([client, HostId(config.run.scheduler_host)]);
        let mut replicas = Vec::with_capacity(w.services * w.replicas_per_service);
        for s in 0..w.services {
            replicas.extend(placer.place(ServiceId(s as u32), w.replicas_per_service, w.actors_per_replica)?);
        }
        let chain = Arc::new(config.chain()?);
        let requests = generate_arrivals(w.rate_rps, w.duration_s, derive_seed(w.seed, ARRIVAL_STREAM), &chain, client);
        Ok(Self {
            platform,
            replicas,
            requests,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scheduler: SchedulerKind,
    pub rate_rps: f64,
    pub seed: u64,
    pub generated: usize,
    pub completed: usize,
    pub dropped: usize,
    pub makespan_mean_s: f64,
    pub makespan_p50_s: f64,
    pub makespan_p95_s: f64,
    pub makespan_p99_s: f64,
    pub makespan_max_s: f64,
    /// Over completed requests.
    pub mean_sched_delay_s: f64,
    pub mean_sidecar_s: f64,
    pub total_carbon_g: f64,
    pub total_energy_j: f64,
    /// Host seconds spent simulating; the one non-deterministic field.
    pub sim_wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub summary: RunSummary,
    pub records: Vec<ExecutionRecord>,
    pub stats: EngineStats,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput, Error> {
    let scenario = Scenario::build(config)?;
    let started = Instant::now();
    let out = engine::run(&scenario.platform, &scenario.replicas, &scenario.requests, &config.engine_options())?;
    let wall = started.elapsed().as_secs_f64();
    let summary = summarize(
        config.scheduler.kind,
        config.workload.rate_rps,
        config.workload.seed,
        &out.records,
        out.stats.total_energy_j(),
        wall,
    );
    Ok(ScenarioOutput {
        summary,
        records: out.records,
        stats: out.stats,
    })
}

pub fn summarize(
    scheduler: SchedulerKind,
    rate_rps: f64,
    seed: u64,
    records: &[ExecutionRecord],
    total_energy_j: f64,
    sim_wall_s: f64,
) -> RunSummary {
    let done: Vec<&ExecutionRecord> = records.iter().filter(|r| r.is_completed()).collect();
    let mut spans: Vec<f64> = done.iter().filter_map(|r| r.makespan()).collect();
    spans.sort_by(f64::total_cmp);
    let sched: Vec<f64> = done.iter().map(|r| r.sched_delay()).collect();
    let sidecar: Vec<f64> = done.iter().map(|r| r.total_sidecar()).collect();
    RunSummary {
        scheduler,
        rate_rps,
        seed,
        generated: records.len(),
        completed: done.len(),
        dropped: records.len() - done.len(),
        makespan_mean_s: mean(&spans),
        makespan_p50_s: nearest_rank(&spans, 50.0),
        makespan_p95_s: nearest_rank(&spans, 95.0),
        makespan_p99_s: nearest_rank(&spans, 99.0),
        makespan_max_s: spans.last().copied().unwrap_or(f64::NAN),
        mean_sched_delay_s: mean(&sched),
        mean_sidecar_s: mean(&sidecar),
        total_carbon_g: records.iter().map(|r| r.carbon_g).sum(),
        total_energy_j,
        sim_wall_s,
    }
}

/// One CSV row per request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRow {
    pub request_id: u64,
    pub scheduler: SchedulerKind,
    pub rate_rps: f64,
    pub seed: u64,
    pub submit_s: f64,
    pub complete_s: Option<f64>,
    pub makespan_s: Option<f64>,
    pub status: String,
    pub sched_delay_s: f64,
    pub sum_twl_s: f64,
    pub sum_proc_s: f64,
    pub sum_sidecar_s: f64,
    pub carbon_g: f64,
}

impl RequestRow {
    pub fn from_record(r: &ExecutionRecord, scheduler: SchedulerKind, rate_rps: f64, seed: u64) -> Self {
        Self {
            request_id: r.request_id.0,
            scheduler,
            rate_rps,
            seed,
            submit_s: r.submit_time,
            complete_s: r.t_complete,
            makespan_s: r.makespan(),
            status: status_label(&r.status).to_string(),
            sched_delay_s: r.sched_delay(),
            sum_twl_s: r.twl().iter().sum(),
            sum_proc_s: r.proc_latencies().iter().sum(),
            sum_sidecar_s: r.total_sidecar(),
            carbon_g: r.carbon_g,
        }
    }

    pub fn is_completed(&self) -> bool {
        self.status == "completed"
    }
}

pub fn status_label(status: &Status) -> &'static str {
    use crate::engine::DropCause::*;
    match status {
        Status::Completed => "completed",
        Status::Dropped(NoCapacity { .. }) => "dropped_capacity",
        Status::Dropped(LatencyBudget { .. }) => "dropped_budget",
        Status::Dropped(NoCandidates { .. }) => "dropped_no_replica",
    }
}

pub fn rows(output: &ScenarioOutput) -> Vec<RequestRow> {
    let s = &output.summary;
    output
        .records
        .iter()
        .map(|r| RequestRow::from_record(r, s.scheduler, s.rate_rps, s.seed))
        .collect()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Writes serializable rows with a header, even when there are none.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), Error> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const REQUEST_HEADER: [&str; 13] = [
    "request_id",
    "scheduler",
    "rate_rps",
    "seed",
    "submit_s",
    "complete_s",
    "makespan_s",
    "status",
    "sched_delay_s",
    "sum_twl_s",
    "sum_proc_s",
    "sum_sidecar_s",
    "carbon_g",
];

pub const SUMMARY_HEADER: [&str; 16] = [
    "scheduler",
    "rate_rps",
    "seed",
    "generated",
    "completed",
    "dropped",
    "makespan_mean_s",
    "makespan_p50_s",
    "makespan_p95_s",
    "makespan_p99_s",
    "makespan_max_s",
    "mean_sched_delay_s",
    "mean_sidecar_s",
    "total_carbon_g",
    "total_energy_j",
    "sim_wall_s",
];

pub fn write_requests_csv(path: &Path, rows: &[RequestRow]) -> Result<(), Error> {
    write_csv(path, rows, &REQUEST_HEADER)
}

pub fn write_summaries_csv(path: &Path, summaries: &[RunSummary]) -> Result<(), Error> {
    write_csv(path, summaries, &SUMMARY_HEADER)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, Error> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

pub fn read_requests_csv(path: &Path) -> Result<Vec<RequestRow>, Error> {
    read_csv(path)
}

/// Mean makespan over completed rows, as [`RunSummary::makespan_mean_s`]
/// computes it.
pub fn mean_makespan(rows: &[RequestRow]) -> f64 {
    let mut spans: Vec<f64> = rows.iter().filter(|r| r.is_completed()).filter_map(|r| r.makespan_s).collect();
    spans.sort_by(f64::total_cmp);
    mean(&spans)
}
