//! Simulated infrastructure: regions of hosts joined by a flow-level network.
//!
//! Topology is a star per region (one edge link from every host to its region
//! switch) with a single backbone joining the region switches. A route between
//! two hosts is therefore empty (same host), two edge links (same region), or
//! edge → backbone → edge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, DomainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HostId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub u32);

impl HostId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RegionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for HostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostSpec {
    pub id: HostId,
    pub region_id: RegionId,
    pub cores: u32,
    /// Per-core compute rate in flop/s.
    pub speed: f64,
    pub power_off: f64,
    pub power_idle: f64,
    pub power_max: f64,
}

impl HostSpec {
    /// Seconds one core needs for `work` flop without contention.
    pub fn compute_time(&self, work: f64) -> f64 {
        work / self.speed
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.cores == 0 {
            return Err(ConfigError::new("cores_per_host", "must be >= 1"));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(ConfigError::new("cpu_gflops", "must be > 0"));
        }
        if !(0.0 <= self.power_off
            && self.power_off <= self.power_idle
            && self.power_idle <= self.power_max)
        {
            return Err(ConfigError::new(
                "power_*_W",
                format!(
                    "need 0 <= off <= idle <= max, got {} / {} / {}",
                    self.power_off, self.power_idle, self.power_max
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkKind {
    Edge,
    Backbone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    /// Bytes per second.
    pub bandwidth: f64,
    /// Seconds.
    pub latency: f64,
    pub kind: LinkKind,
}

impl LinkSpec {
    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if !(self.bandwidth > 0.0) {
            return Err(ConfigError::new(key, "bandwidth must be > 0"));
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err(ConfigError::new(key, "latency must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub id: RegionId,
    pub host_ids: Vec<HostId>,
    /// gCO2 per joule.
    pub carbon_intensity: f64,
}

/// Platform section of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlatformConfig {
    pub hosts_total: usize,
    pub regions: usize,
    /// Explicit per-region host counts; an even split when absent.
    pub region_hosts: Option<Vec<usize>>,
    pub cores_per_host: u32,
    pub cpu_gflops: f64,
    #[serde(rename = "link_bw_Bps")]
    pub link_bw_bps: f64,
    pub link_lat_s: f64,
    #[serde(rename = "backbone_bw_Bps")]
    pub backbone_bw_bps: f64,
    pub backbone_lat_s: f64,
    #[serde(rename = "power_off_W")]
    pub power_off_w: f64,
    #[serde(rename = "power_idle_W")]
    pub power_idle_w: f64,
    #[serde(rename = "power_max_W")]
    pub power_max_w: f64,
    /// gCO2/J indexed by region id. Empty means the synthetic default ladder.
    pub carbon_intensity: Vec<f64>,
}

impl Default for PlatformConfig {
    fn default() -> Self {
        Self {
            hosts_total: 1100,
            regions: 10,
            region_hosts: None,
            cores_per_host: 24,
            cpu_gflops: 10.0,
            link_bw_bps: 125e6,
            link_lat_s: 50e-6,
            backbone_bw_bps: 2.25e9,
            backbone_lat_s: 500e-6,
            power_off_w: 10.0,
            power_idle_w: 20.0,
            power_max_w: 200.0,
            carbon_intensity: Vec::new(),
        }
    }
}

impl PlatformConfig {
    /// The 1/10 linear scale of the full 1100-host topology.
    pub fn desk_scale() -> Self {
        Self {
            hosts_total: 110,
            ..Self::default()
        }
    }

    /// Synthetic heterogeneity: 0.1, 0.2, ... gCO2/J ascending with region id.
    pub fn default_carbon_ladder(regions: usize) -> Vec<f64> {
        (0..regions).map(|r| 0.1 * (r + 1) as f64).collect()
    }

    pub fn region_quotas(&self) -> Vec<usize> {
        match &self.region_hosts {
            Some(q) => q.clone(),
            None if self.regions == 0 => Vec::new(),
            None => {
                let base = self.hosts_total / self.regions;
                let extra = self.hosts_total % self.regions;
                (0..self.regions)
                    .map(|r| base + usize::from(r < extra))
                    .collect()
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.hosts_total == 0 {
            return Err(ConfigError::new("hosts_total", "must be >= 1"));
        }
        if self.regions == 0 {
            return Err(ConfigError::new("regions", "must be >= 1"));
        }
        let quotas = self.region_quotas();
        if quotas.len() != self.regions {
            return Err(ConfigError::new(
                "region_hosts",
                format!("{} entries for {} regions", quotas.len(), self.regions),
            ));
        }
        if quotas.iter().sum::<usize>() != self.hosts_total {
            return Err(ConfigError::new(
                "region_hosts",
                format!("quotas sum to {}, hosts_total is {}", quotas.iter().sum::<usize>(), self.hosts_total),
            ));
        }
        if quotas.contains(&0) {
            return Err(ConfigError::new("region_hosts", "every region needs at least one host"));
        }
        if !self.carbon_intensity.is_empty() && self.carbon_intensity.len() != self.regions {
            return Err(ConfigError::new(
                "carbon_intensity",
                format!("{} values for {} regions", self.carbon_intensity.len(), self.regions),
            ));
        }
        if self.carbon_intensity.iter().any(|ci| !(*ci >= 0.0 && ci.is_finite())) {
            return Err(ConfigError::new("carbon_intensity", "values must be >= 0"));
        }
        Ok(())
    }
}

/// The simulated world. Immutable once built.
#[derive(Debug, Clone)]
pub struct Platform {
    regions: Vec<RegionSpec>,
    hosts: Vec<HostSpec>,
    edge_links: Vec<LinkSpec>,
    backbone: LinkSpec,
}

pub fn build_platform(config: &PlatformConfig) -> Result<Platform, ConfigError> {
    config.validate()?;
    let carbon = if config.carbon_intensity.is_empty() {
        PlatformConfig::default_carbon_ladder(config.regions)
    } else {
        config.carbon_intensity.clone()
    };
    let edge = LinkSpec {
        bandwidth: config.link_bw_bps,
        latency: config.link_lat_s,
        kind: LinkKind::Edge,
    };
    let backbone = LinkSpec {
        bandwidth: config.backbone_bw_bps,
        latency: config.backbone_lat_s,
        kind: LinkKind::Backbone,
    };

    let mut hosts = Vec::with_capacity(config.hosts_total);
    let mut regions = Vec::with_capacity(config.regions);
    for (r, quota) in config.region_quotas().into_iter().enumerate() {
        let region_id = RegionId(r as u32);
        let mut host_ids = Vec::with_capacity(quota);
        for _ in 0..quota {
            let id = HostId(hosts.len() as u32);
            host_ids.push(id);
            hosts.push(HostSpec {
                id,
                region_id,
                cores: config.cores_per_host,
                speed: config.cpu_gflops * 1e9,
                power_off: config.power_off_w,
                power_idle: config.power_idle_w,
                power_max: config.power_max_w,
            });
        }
        regions.push(RegionSpec {
            id: region_id,
            host_ids,
            carbon_intensity: carbon[r],
        });
    }
    let edge_links = vec![edge; hosts.len()];
    Platform::new(regions, hosts, edge_links, backbone)
}

impl Platform {
    /// Assemble a platform from explicit parts, for heterogeneous setups.
    /// `edge_links[i]` is the access link of host `i`.
    pub fn new(
        regions: Vec<RegionSpec>,
        hosts: Vec<HostSpec>,
        edge_links: Vec<LinkSpec>,
        backbone: LinkSpec,
    ) -> Result<Self, ConfigError> {
        if hosts.is_empty() {
            return Err(ConfigError::new("hosts_total", "must be >= 1"));
        }
        if regions.is_empty() {
            return Err(ConfigError::new("regions", "must be >= 1"));
        }
        if edge_links.len() != hosts.len() {
            return Err(ConfigError::new("edge_links", "one edge link per host required"));
        }
        let mut owner = vec![None; hosts.len()];
        for (i, region) in regions.iter().enumerate() {
            if region.id.index() != i {
                return Err(ConfigError::new("regions", "region ids must be dense and ordered"));
            }
            if region.host_ids.is_empty() {
                return Err(ConfigError::new("regions", format!("{} has no hosts", region.id)));
            }
            if !(region.carbon_intensity >= 0.0 && region.carbon_intensity.is_finite()) {
                return Err(ConfigError::new("carbon_intensity", "values must be >= 0"));
            }
            for h in &region.host_ids {
                let slot = owner
                    .get_mut(h.index())
                    .ok_or_else(|| ConfigError::new("regions", format!("unknown host {h}")))?;
                if slot.is_some() {
                    return Err(ConfigError::new("regions", format!("{h} listed twice")));
                }
                *slot = Some(region.id);
            }
        }
        for (i, host) in hosts.iter().enumerate() {
            if host.id.index() != i {
                return Err(ConfigError::new("hosts", "host ids must be dense and ordered"));
            }
            host.validate()?;
            if owner[i] != Some(host.region_id) {
                return Err(ConfigError::new(
                    "regions",
                    format!("{} must belong to exactly its own region {}", host.id, host.region_id),
                ));
            }
        }
        for link in &edge_links {
            link.validate("link")?;
        }
        backbone.validate("backbone")?;
        Ok(Self {
            regions,
            hosts,
            edge_links,
            backbone,
        })
    }

    pub fn hosts(&self) -> &[HostSpec] {
        &self.hosts
    }

    pub fn regions(&self) -> &[RegionSpec] {
        &self.regions
    }

    pub fn host(&self, id: HostId) -> &HostSpec {
        &self.hosts[id.index()]
    }

    pub fn region(&self, id: RegionId) -> &RegionSpec {
        &self.regions[id.index()]
    }

    pub fn region_of(&self, host: HostId) -> &RegionSpec {
        self.region(self.host(host).region_id)
    }

    pub fn carbon_intensity(&self, host: HostId) -> f64 {
        self.region_of(host).carbon_intensity
    }

    pub fn contains(&self, host: HostId) -> bool {
        host.index() < self.hosts.len()
    }

    pub fn route(&self, a: HostId, b: HostId) -> Vec<LinkSpec> {
        if a == b {
            Vec::new()
        } else if self.host(a).region_id == self.host(b).region_id {
            vec![self.edge_links[a.index()], self.edge_links[b.index()]]
        } else {
            vec![
                self.edge_links[a.index()],
                self.backbone,
                self.edge_links[b.index()],
            ]
        }
    }

    /// Allocation-free equivalent of `transfer_time(bytes, &self.route(a, b))`.
    pub fn transfer_time(&self, bytes: f64, a: HostId, b: HostId) -> f64 {
        if a == b {
            return 0.0;
        }
        let ea = &self.edge_links[a.index()];
        let eb = &self.edge_links[b.index()];
        let (latency, bandwidth) = if self.host(a).region_id == self.host(b).region_id {
            (ea.latency + eb.latency, ea.bandwidth.min(eb.bandwidth))
        } else {
            (
                ea.latency + self.backbone.latency + eb.latency,
                ea.bandwidth.min(eb.bandwidth).min(self.backbone.bandwidth),
            )
        };
        latency + bytes / bandwidth
    }
}

pub fn total_latency(route: &[LinkSpec]) -> f64 {
    route.iter().map(|l| l.latency).sum()
}

pub fn bottleneck_bandwidth(route: &[LinkSpec]) -> f64 {
    route
        .iter()
        .map(|l| l.bandwidth)
        .fold(f64::INFINITY, f64::min)
}

/// Flow-level transfer: sum of link latencies plus bytes over the bottleneck.
/// Concurrent flows do not share bandwidth.
pub fn transfer_time(bytes: f64, route: &[LinkSpec]) -> f64 {
    if route.is_empty() {
        return 0.0;
    }
    total_latency(route) + bytes / bottleneck_bandwidth(route)
}

/// Linear power curve between idle and max; `power_off` when switched off.
pub fn power_draw(host: &HostSpec, utilization: f64, on: bool) -> Result<f64, DomainError> {
    if !(0.0..=1.0).contains(&utilization) {
        return Err(DomainError::Utilization(utilization));
    }
    if !on {
        return Ok(host.power_off);
    }
    Ok(host.power_idle + utilization * (host.power_max - host.power_idle))
}

/// Dynamic energy of `busy_core_seconds` of work on `host`, times the region's
/// carbon intensity. Idle draw is not attributed.
pub fn exec_carbon(host: &HostSpec, region: &RegionSpec, busy_core_seconds: f64) -> f64 {
    dynamic_watts_per_core(host) * busy_core_seconds * region.carbon_intensity
}

pub fn dynamic_watts_per_core(host: &HostSpec) -> f64 {
    (host.power_max - host.power_idle) / host.cores as f64
}
