//! TOML scenario files.
//!
//! ```toml
//! [platform]
//! hosts_total = 110
//! regions = 10
//!
//! [workload]
//! services = 10
//! replicas_per_service = 5
//! rate_rps = 100.0
//! duration_s = 10.0
//!
//! [scheduler]
//! kind = "decentralized"
//! w_lat = 1.0
//!
//! [metadata]
//! metadata_interval_s = 1.0
//! ```
//!
//! Every section and key is optional; omitted values take the desk-scale
//! defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{DecisionTiming, DropPolicy, EngineOptions, SchedulerKind};
use crate::error::{ConfigError, Error};
use crate::metadata::MetadataConfig;
use crate::platform::{HostId, PlatformConfig};
use crate::sched::central::SolverOptions;
use crate::sched::sidecar::SidecarPolicy;
use crate::workload::{ServiceChain, ServiceId, ServiceStage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub services: usize,
    pub replicas_per_service: usize,
    /// Service ids in execution order; `0..services` when absent.
    pub chain: Option<Vec<u32>>,
    pub work_flop: f64,
    pub payload_bytes: f64,
    pub actors_per_replica: u32,
    pub rate_rps: f64,
    pub duration_s: f64,
    pub latency_budget_s: f64,
    pub seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            services: 10,
            replicas_per_service: 5,
            chain: None,
            work_flop: 1e9,
            payload_bytes: 1e6,
            actors_per_replica: 24,
            rate_rps: 10.0,
            duration_s: 10.0,
            latency_budget_s: 5.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimingKind {
    #[default]
    Modeled,
    Wallclock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    pub w_lat: f64,
    pub saturate_to_queue: bool,
    pub sidecar_latency_s: f64,
    pub sidecar_per_candidate_s: f64,
    pub charge_client_decision: bool,
    pub scheduler_rtt_s: Option<f64>,
    pub control_msg_bytes: f64,
    pub scheduler_overhead_s: f64,
    pub solver_per_op_s: f64,
    pub drop_policy: DropPolicy,
    pub timing: TimingKind,
    /// Wall-clock multiplier when `timing = "wallclock"`.
    pub slowdown: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        let e = EngineOptions::default();
        Self {
            kind: e.scheduler,
            w_lat: e.policy.w_lat,
            saturate_to_queue: e.policy.saturate_to_queue,
            sidecar_latency_s: e.sidecar_latency_s,
            sidecar_per_candidate_s: e.sidecar_per_candidate_s,
            charge_client_decision: e.charge_client_decision,
            scheduler_rtt_s: e.scheduler_rtt,
            control_msg_bytes: e.control_msg_bytes,
            scheduler_overhead_s: e.scheduler_overhead_s,
            solver_per_op_s: e.solver_per_op_s,
            drop_policy: e.drop_policy,
            timing: TimingKind::Modeled,
            slowdown: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Host that submits every request.
    pub client_host: u32,
    /// Host running the central scheduler.
    pub scheduler_host: u32,
    pub out_dir: Option<PathBuf>,
    /// Count sidecar decisions that disagree with ground truth.
    pub audit: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            client_host: 0,
            scheduler_host: 1,
            out_dir: None,
            audit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub platform: PlatformConfig,
    pub workload: WorkloadConfig,
    pub scheduler: SchedulerConfig,
    pub metadata: MetadataConfig,
    pub run: RunConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            platform: PlatformConfig::desk_scale(),
            workload: WorkloadConfig::default(),
            scheduler: SchedulerConfig::default(),
            metadata: MetadataConfig::default(),
            run: RunConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::new("toml", e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn with_kind(&self, kind: SchedulerKind) -> Self {
        let mut c = self.clone();
        c.scheduler.kind = kind;
        c
    }

    pub fn with_rate(&self, rate_rps: f64) -> Self {
        let mut c = self.clone();
        c.workload.rate_rps = rate_rps;
        c
    }

    pub fn service_order(&self) -> Vec<u32> {
        self.workload
            .chain
            .clone()
            .unwrap_or_else(|| (0..self.workload.services as u32).collect())
    }

    pub fn chain(&self) -> Result<ServiceChain, ConfigError> {
        let w = &self.workload;
        let stages = self
            .service_order()
            .into_iter()
            .map(|s| ServiceStage {
                service_id: ServiceId(s),
                work: w.work_flop,
                payload_out: w.payload_bytes,
            })
            .collect();
        ServiceChain::new(stages, w.latency_budget_s, w.payload_bytes)
    }

    pub fn engine_options(&self) -> EngineOptions {
        let s = &self.scheduler;
        EngineOptions {
            scheduler: s.kind,
            policy: SidecarPolicy {
                w_lat: s.w_lat,
                saturate_to_queue: s.saturate_to_queue,
            },
            metadata: self.metadata,
            solver: SolverOptions::default(),
            drop_policy: s.drop_policy,
            timing: match s.timing {
                TimingKind::Modeled => DecisionTiming::Modeled,
                TimingKind::Wallclock => DecisionTiming::WallClock { slowdown: s.slowdown },
            },
            sidecar_latency_s: s.sidecar_latency_s,
            sidecar_per_candidate_s: s.sidecar_per_candidate_s,
            charge_client_decision: s.charge_client_decision,
            scheduler_host: HostId(self.run.scheduler_host),
            scheduler_rtt: s.scheduler_rtt_s,
            control_msg_bytes: s.control_msg_bytes,
            scheduler_overhead_s: s.scheduler_overhead_s,
            solver_per_op_s: s.solver_per_op_s,
            audit: self.run.audit,
            horizon: Some(self.workload.duration_s),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.platform.validate()?;
        self.metadata.validate()?;
        let w = &self.workload;
        if w.services == 0 {
            return Err(ConfigError::new("workload.services", "must be >= 1"));
        }
        if w.replicas_per_service == 0 {
            return Err(ConfigError::new("workload.replicas_per_service", "must be >= 1"));
        }
        if w.actors_per_replica == 0 {
            return Err(ConfigError::new("workload.actors_per_replica", "must be >= 1"));
        }
        if !(w.rate_rps > 0.0 && w.rate_rps.is_finite()) {
            return Err(ConfigError::new("workload.rate_rps", "must be > 0"));
        }
        if !(w.duration_s > 0.0 && w.duration_s.is_finite()) {
            return Err(ConfigError::new("workload.duration_s", "must be > 0"));
        }
        if let Some(bad) = self.service_order().iter().find(|s| **s as usize >= w.services) {
            return Err(ConfigError::new(
                "workload.chain",
                format!("service {bad} out of range for {} services", w.services),
            ));
        }
        self.chain()?;
        let hosts = self.platform.hosts_total as u32;
        for (key, h) in [("run.client_host", self.run.client_host), ("run.scheduler_host", self.run.scheduler_host)] {
            if h >= hosts {
                return Err(ConfigError::new(key, format!("host {h} out of range for {hosts} hosts")));
            }
        }
        let reserved = if self.run.client_host == self.run.scheduler_host { 1 } else { 2 };
        let eligible = self.platform.hosts_total.saturating_sub(reserved);
        if w.replicas_per_service > eligible {
            return Err(ConfigError::new(
                "workload.replicas_per_service",
                format!("{} replicas need distinct hosts but only {eligible} are eligible", w.replicas_per_service),
            ));
        }
        if self.scheduler.timing == TimingKind::Wallclock && !(self.scheduler.slowdown >= 0.0) {
            return Err(ConfigError::new("scheduler.slowdown", "must be >= 0"));
        }
        self.engine_options().validate()
    }
}
