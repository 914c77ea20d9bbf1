//! Eventually-consistent metrics layer.
//!
//! Hosts publish [`HostMetrics`]; an observer in region `a` sees a publication
//! from a host in region `b` only once `propagation_delay(a, b)` has elapsed.
//! Writes are last-writer-wins on `measured_at` (one writer per host).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::platform::{HostId, Platform, RegionId};
use crate::workload::{ReplicaId, ReplicaInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicaLoad {
    pub replica_id: ReplicaId,
    pub busy_actors: u32,
    pub queue_length: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostMetrics {
    pub host_id: HostId,
    pub cpu_utilization: f64,
    /// Sum over the host's replicas.
    pub busy_actors: u32,
    /// Sum over the host's replicas.
    pub queue_length: u32,
    pub measured_at: f64,
    /// Per-replica breakdown, sorted by replica id.
    pub replicas: Vec<ReplicaLoad>,
}

impl HostMetrics {
    pub fn idle(host_id: HostId, replicas: impl IntoIterator<Item = ReplicaId>) -> Self {
        let mut replicas: Vec<ReplicaLoad> = replicas
            .into_iter()
            .map(|replica_id| ReplicaLoad {
                replica_id,
                busy_actors: 0,
                queue_length: 0,
            })
            .collect();
        replicas.sort_by_key(|r| r.replica_id);
        Self {
            host_id,
            cpu_utilization: 0.0,
            busy_actors: 0,
            queue_length: 0,
            measured_at: 0.0,
            replicas,
        }
    }

    pub fn replica(&self, id: ReplicaId) -> Option<&ReplicaLoad> {
        self.replicas
            .binary_search_by_key(&id, |r| r.replica_id)
            .ok()
            .map(|i| &self.replicas[i])
    }

    pub fn replica_mut(&mut self, id: ReplicaId) -> Option<&mut ReplicaLoad> {
        self.replicas
            .binary_search_by_key(&id, |r| r.replica_id)
            .ok()
            .map(|i| &mut self.replicas[i])
    }

    /// Recompute the host-level sums from the per-replica entries.
    pub fn refresh_totals(&mut self) {
        self.busy_actors = self.replicas.iter().map(|r| r.busy_actors).sum();
        self.queue_length = self.replicas.iter().map(|r| r.queue_length).sum();
    }
}

/// Anything a scheduler can read host metrics from.
pub trait MetricsView {
    fn host_metrics(&self, host: HostId) -> &HostMetrics;

    fn replica_load(&self, host: HostId, replica: ReplicaId) -> ReplicaLoad {
        self.host_metrics(host)
            .replica(replica)
            .copied()
            .unwrap_or(ReplicaLoad {
                replica_id: replica,
                busy_actors: 0,
                queue_length: 0,
            })
    }
}

/// Ground truth: metrics indexed by host id.
impl MetricsView for [HostMetrics] {
    fn host_metrics(&self, host: HostId) -> &HostMetrics {
        &self[host.index()]
    }
}

impl MetricsView for Vec<HostMetrics> {
    fn host_metrics(&self, host: HostId) -> &HostMetrics {
        &self[host.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetadataConfig {
    /// Publication period; 0 publishes on every state change.
    pub metadata_interval_s: f64,
    pub intra_region_delay_s: f64,
    pub inter_region_delay_s: f64,
}

impl Default for MetadataConfig {
    fn default() -> Self {
        Self {
            metadata_interval_s: 1.0,
            intra_region_delay_s: 0.1,
            inter_region_delay_s: 1.0,
        }
    }
}

impl MetadataConfig {
    /// No staleness at all: every read returns the live state.
    pub fn strong() -> Self {
        Self {
            metadata_interval_s: 0.0,
            intra_region_delay_s: 0.0,
            inter_region_delay_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("metadata_interval_s", self.metadata_interval_s),
            ("intra_region_delay_s", self.intra_region_delay_s),
            ("inter_region_delay_s", self.inter_region_delay_s),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::new(key, "must be a finite value >= 0"));
            }
        }
        Ok(())
    }

    pub fn max_delay(&self) -> f64 {
        self.intra_region_delay_s.max(self.inter_region_delay_s)
    }

    pub fn delay(&self, observer: RegionId, host: RegionId) -> f64 {
        if observer == host {
            self.intra_region_delay_s
        } else {
            self.inter_region_delay_s
        }
    }
}

#[derive(Debug, Clone)]
struct Published {
    at: f64,
    metrics: HostMetrics,
}

#[derive(Debug, Clone)]
pub struct MetadataStore {
    config: MetadataConfig,
    host_region: Vec<RegionId>,
    history: Vec<VecDeque<Published>>,
}

impl MetadataStore {
    /// Every host starts with idle metrics visible to all observers.
    pub fn new(platform: &Platform, replicas: &[ReplicaInstance], config: MetadataConfig) -> Self {
        let mut initial: Vec<HostMetrics> = platform
            .hosts()
            .iter()
            .map(|h| HostMetrics::idle(h.id, []))
            .collect();
        for r in replicas {
            initial[r.host_id.index()].replicas.push(ReplicaLoad {
                replica_id: r.replica_id,
                busy_actors: 0,
                queue_length: 0,
            });
        }
        let history = initial
            .into_iter()
            .map(|mut m| {
                m.replicas.sort_by_key(|r| r.replica_id);
                VecDeque::from([Published {
                    at: f64::NEG_INFINITY,
                    metrics: m,
                }])
            })
            .collect();
        Self {
            config,
            host_region: platform.hosts().iter().map(|h| h.region_id).collect(),
            history,
        }
    }

    pub fn config(&self) -> &MetadataConfig {
        &self.config
    }

    pub fn publish(&mut self, metrics: HostMetrics, now: f64) {
        let max_delay = self.config.max_delay();
        let entries = &mut self.history[metrics.host_id.index()];
        let last = entries.back().expect("history never empty");
        if metrics.measured_at < last.metrics.measured_at && last.at.is_finite() {
            return;
        }
        if last.at == now {
            entries.pop_back();
        }
        entries.push_back(Published { at: now, metrics });
        // Older entries are unreachable once their successor is visible everywhere.
        while entries.len() > 1 && entries[1].at + max_delay <= now {
            entries.pop_front();
        }
    }

    /// Latest published entry, regardless of visibility.
    pub fn authoritative(&self, host: HostId) -> &HostMetrics {
        &self.history[host.index()].back().expect("history never empty").metrics
    }

    /// Newest entry for `host` that an observer in `observer_region` can see at `now`.
    pub fn visible(&self, observer_region: RegionId, host: HostId, now: f64) -> &HostMetrics {
        let delay = self.config.delay(observer_region, self.host_region[host.index()]);
        let entries = &self.history[host.index()];
        &entries
            .iter()
            .rev()
            .find(|p| p.at + delay <= now)
            .unwrap_or(&entries[0])
            .metrics
    }

    /// Lazily-resolved view for one observer; no copying.
    pub fn view(&self, observer: HostId, now: f64) -> StoreView<'_> {
        StoreView {
            store: self,
            observer_region: self.host_region[observer.index()],
            now,
        }
    }

    pub fn snapshot(&self, observer: HostId, now: f64) -> MetadataSnapshot {
        let region = self.host_region[observer.index()];
        MetadataSnapshot {
            observer_id: observer,
            view: (0..self.history.len())
                .map(|h| self.visible(region, HostId(h as u32), now).clone())
                .collect(),
            taken_at: now,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StoreView<'a> {
    store: &'a MetadataStore,
    observer_region: RegionId,
    now: f64,
}

impl MetricsView for StoreView<'_> {
    fn host_metrics(&self, host: HostId) -> &HostMetrics {
        self.store.visible(self.observer_region, host, self.now)
    }
}

/// A materialised per-observer copy of the store.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataSnapshot {
    pub observer_id: HostId,
    /// Indexed by host id.
    pub view: Vec<HostMetrics>,
    pub taken_at: f64,
}

impl MetadataSnapshot {
    pub fn max_age(&self) -> f64 {
        self.view
            .iter()
            .map(|m| self.taken_at - m.measured_at)
            .fold(0.0, f64::max)
    }
}

impl MetricsView for MetadataSnapshot {
    fn host_metrics(&self, host: HostId) -> &HostMetrics {
        &self.view[host.index()]
    }
}
