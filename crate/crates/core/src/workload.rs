//! Service chains, replica placement and the open-loop arrival process.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, PlacementError};
use crate::platform::{HostId, Platform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServiceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReplicaId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequestId(pub u64);

impl ServiceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ReplicaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ServiceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0 + 1)
    }
}

impl fmt::Display for ReplicaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rep{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceStage {
    pub service_id: ServiceId,
    /// Flop per request.
    pub work: f64,
    /// Bytes forwarded to the next stage.
    pub payload_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceChain {
    pub stages: Vec<ServiceStage>,
    /// End-to-end latency budget in seconds.
    pub latency_budget: f64,
    /// Bytes the client sends to the first stage.
    pub request_bytes: f64,
}

impl ServiceChain {
    pub fn new(
        stages: Vec<ServiceStage>,
        latency_budget: f64,
        request_bytes: f64,
    ) -> Result<Self, ConfigError> {
        if stages.is_empty() {
            return Err(ConfigError::new("chain", "must contain at least one service"));
        }
        if !(latency_budget > 0.0) {
            return Err(ConfigError::new("latency_budget_s", "must be > 0"));
        }
        if stages.iter().any(|s| !(s.work > 0.0 && s.work.is_finite())) {
            return Err(ConfigError::new("work_flop", "must be > 0"));
        }
        if stages.iter().any(|s| !(s.payload_out >= 0.0)) || !(request_bytes >= 0.0) {
            return Err(ConfigError::new("payload_bytes", "must be >= 0"));
        }
        Ok(Self {
            stages,
            latency_budget,
            request_bytes,
        })
    }

    /// `n` stages S1..Sn, each with the same work and payload.
    pub fn uniform(n: usize, work: f64, payload: f64, latency_budget: f64) -> Result<Self, ConfigError> {
        let stages = (0..n)
            .map(|i| ServiceStage {
                service_id: ServiceId(i as u32),
                work,
                payload_out: payload,
            })
            .collect();
        Self::new(stages, latency_budget, payload)
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Bytes that travel into stage `i`.
    pub fn bytes_into(&self, i: usize) -> f64 {
        if i == 0 {
            self.request_bytes
        } else {
            self.stages[i - 1].payload_out
        }
    }
}

/// A deployed replica. Its FIFO queue lives in the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaInstance {
    pub replica_id: ReplicaId,
    pub service_id: ServiceId,
    pub host_id: HostId,
    pub actor_pool: u32,
}

#[derive(Debug, Clone)]
pub struct Request {
    pub request_id: RequestId,
    pub chain: Arc<ServiceChain>,
    pub submit_time: f64,
    pub origin_host: HostId,
}

/// SplitMix64 step; derives independent seeds for separate random streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Places replicas service by service, handing out globally unique ids.
///
/// Each service walks the regions round-robin starting at `service_id mod
/// regions`, and inside a region picks a host uniformly at random among the
/// eligible hosts that do not already carry a replica of that service.
#[derive(Debug)]
pub struct ReplicaPlacer<'a> {
    platform: &'a Platform,
    excluded: BTreeSet<HostId>,
    seed: u64,
    next_id: u32,
}

impl<'a> ReplicaPlacer<'a> {
    pub fn new(platform: &'a Platform, seed: u64) -> Self {
        Self {
            platform,
            excluded: BTreeSet::new(),
            seed,
            next_id: 0,
        }
    }

    /// Hosts that never receive replicas (client, central scheduler).
    pub fn exclude(mut self, hosts: impl IntoIterator<Item = HostId>) -> Self {
        self.excluded.extend(hosts);
        self
    }

    pub fn place(
        &mut self,
        service_id: ServiceId,
        count: usize,
        actor_pool: u32,
    ) -> Result<Vec<ReplicaInstance>, PlacementError> {
        if count == 0 {
            return Err(PlacementError::ZeroReplicas);
        }
        let regions = self.platform.regions();
        let mut free: Vec<Vec<HostId>> = regions
            .iter()
            .map(|r| {
                r.host_ids
                    .iter()
                    .copied()
                    .filter(|h| !self.excluded.contains(h))
                    .collect()
            })
            .collect();
        let available: usize = free.iter().map(Vec::len).sum();
        if count > available {
            return Err(PlacementError::TooManyReplicas {
                requested: count,
                available,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, u64::from(service_id.0)));
        let mut region = service_id.0 as usize % regions.len();
        let mut placed = Vec::with_capacity(count);
        while placed.len() < count {
            let pool = &mut free[region];
            if let Some(&host) = pool.choose(&mut rng) {
                pool.retain(|h| *h != host);
                placed.push(ReplicaInstance {
                    replica_id: ReplicaId(self.next_id),
                    service_id,
                    host_id: host,
                    actor_pool,
                });
                self.next_id += 1;
            }
            region = (region + 1) % regions.len();
        }
        Ok(placed)
    }
}

pub fn place_replicas(
    platform: &Platform,
    service_id: ServiceId,
    count: usize,
    actor_pool: u32,
    seed: u64,
) -> Result<Vec<ReplicaInstance>, PlacementError> {
    ReplicaPlacer::new(platform, seed).place(service_id, count, actor_pool)
}

/// Replicas grouped by the service they implement.
#[derive(Debug, Clone, Default)]
pub struct ReplicaDirectory {
    by_service: Vec<Vec<ReplicaInstance>>,
}

impl ReplicaDirectory {
    pub fn new(replicas: &[ReplicaInstance]) -> Self {
        let mut by_service: Vec<Vec<ReplicaInstance>> = Vec::new();
        for r in replicas {
            let i = r.service_id.index();
            if by_service.len() <= i {
                by_service.resize_with(i + 1, Vec::new);
            }
            by_service[i].push(r.clone());
        }
        for reps in &mut by_service {
            reps.sort_by_key(|r| r.replica_id);
        }
        Self { by_service }
    }

    pub fn of(&self, service: ServiceId) -> &[ReplicaInstance] {
        self.by_service.get(service.index()).map_or(&[], Vec::as_slice)
    }

    /// Candidate lists in chain order.
    pub fn for_chain(&self, chain: &ServiceChain) -> Vec<&[ReplicaInstance]> {
        chain.stages.iter().map(|s| self.of(s.service_id)).collect()
    }
}

/// Poisson arrival instants on `[0, duration)`.
pub fn arrival_times(rate_rps: f64, duration: f64, seed: u64) -> Vec<f64> {
    let mut times = Vec::new();
    let Ok(exp) = Exp::new(rate_rps) else {
        return times;
    };
    if !(rate_rps > 0.0 && duration > 0.0) {
        return times;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0_f64;
    loop {
        let mut next = t + exp.sample(&mut rng);
        if next <= t {
            next = t.next_up();
        }
        if next >= duration {
            break;
        }
        times.push(next);
        t = next;
    }
    times
}

pub fn generate_arrivals(
    rate_rps: f64,
    duration: f64,
    seed: u64,
    chain: &Arc<ServiceChain>,
    origin_host: HostId,
) -> Vec<Request> {
    arrival_times(rate_rps, duration, seed)
        .into_iter()
        .enumerate()
        .map(|(i, submit_time)| Request {
            request_id: RequestId(i as u64),
            chain: Arc::clone(chain),
            submit_time,
            origin_host,
        })
        .collect()
}
