//! Decision-time surfaces for both policies on synthetic state.
//!
//! The policies are timed as plain function calls, outside the simulator, so
//! the numbers reflect algorithmic cost only. Cells run strictly one after
//! another. Each repetition re-runs the call until at least
//! [`ComplexityOptions::min_batch_s`] has elapsed and reports the per-call
//! average, which keeps sub-microsecond timings above clock resolution.
//!
//! All cells are cut from one master instance: cell `(n, R)` keeps the first
//! `n` stages and the first `R` replicas of each, so a larger cell contains
//! every smaller one and the surface is not dominated by instance-to-instance
//! variation. Sidecar decisions are timed one hop at a time, as each would
//! run on its own sidecar; the back-to-back sequence is reported alongside.

use std::hint::black_box;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::plot::{heatmap, write_svg};
use crate::bench::scenario::write_csv;
use crate::bench::stats::{mean, std_dev};
use crate::error::{ConfigError, EngineError, Error};
use crate::metadata::{HostMetrics, ReplicaLoad};
use crate::platform::{build_platform, HostId, Platform, PlatformConfig};
use crate::sched::central::{centralized_solve_with, SolverOptions};
use crate::sched::cost::ChainFloors;
use crate::sched::sidecar::{sidecar_next_hop, walk_with_floors, HopQuery, SidecarPolicy};
use crate::workload::{derive_seed, ReplicaInstance, ReplicaPlacer, ServiceChain, ServiceId};

pub const GRID_CHAINS: [usize; 6] = [3, 5, 10, 20, 50, 100];
pub const GRID_REPLICAS: [usize; 8] = [5, 10, 20, 50, 100, 200, 500, 1000];

/// One request's worth of scheduler input.
#[derive(Debug, Clone)]
pub struct Instance {
    pub chain: Arc<ServiceChain>,
    /// Indexed by stage.
    pub candidates: Vec<Vec<ReplicaInstance>>,
    /// Ground truth, indexed by host.
    pub metrics: Vec<HostMetrics>,
    pub origin: HostId,
}

impl Instance {
    pub fn candidate_slices(&self) -> Vec<&[ReplicaInstance]> {
        self.candidates.iter().map(Vec::as_slice).collect()
    }

    /// First `n` stages with the first `r` replicas of each.
    pub fn prefix(&self, n: usize, r: usize) -> Result<Instance, Error> {
        if n > self.chain.len() || self.candidates.iter().take(n).any(|c| c.len() < r) {
            return Err(ConfigError::new("grid", format!("({n}, {r}) exceeds the master instance")).into());
        }
        Ok(Instance {
            chain: Arc::new(ServiceChain::uniform(n, 1e9, 1e6, budget_for(n))?),
            candidates: self.candidates[..n].iter().map(|c| c[..r].to_vec()).collect(),
            metrics: self.metrics.clone(),
            origin: self.origin,
        })
    }
}

// Loose enough that the budget only prunes hopeless labels.
fn budget_for(n: usize) -> f64 {
    2.0 * n as f64
}

/// `n` stages with `r` replicas each, spread over the platform; every replica
/// has spare actors and a small random queue.
pub fn synthetic_instance(platform: &Platform, n: usize, r: usize, seed: u64) -> Result<Instance, Error> {
    const ACTORS: u32 = 24;
    let origin = HostId(0);
    let mut placer = ReplicaPlacer::new(platform, derive_seed(seed, 1)).exclude([origin]);
    let mut candidates = Vec::with_capacity(n);
    for s in 0..n {
        candidates.push(placer.place(ServiceId(s as u32), r, ACTORS)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    let mut metrics: Vec<HostMetrics> = platform.hosts().iter().map(|h| HostMetrics::idle(h.id, [])).collect();
    for rep in candidates.iter().flatten() {
        metrics[rep.host_id.index()].replicas.push(ReplicaLoad {
            replica_id: rep.replica_id,
            busy_actors: rng.random_range(0..ACTORS),
            queue_length: rng.random_range(0..3),
        });
    }
    for m in &mut metrics {
        m.replicas.sort_by_key(|l| l.replica_id);
        m.refresh_totals();
    }
    let chain = ServiceChain::uniform(n, 1e9, 1e6, budget_for(n))?;
    Ok(Instance {
        chain: Arc::new(chain),
        candidates,
        metrics,
        origin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityOptions {
    pub reps: usize,
    /// Minimum batch length for the solver and the full hop sequence.
    pub min_batch_s: f64,
    /// Minimum batch length for each single sidecar decision.
    pub hop_batch_s: f64,
    pub seed: u64,
    /// Platform the synthetic replicas are spread over; must have at least
    /// as many hosts as the largest replica count plus one.
    pub platform: PlatformConfig,
}

impl Default for ComplexityOptions {
    fn default() -> Self {
        Self {
            reps: 5,
            // Long enough that a scheduler hiccup on a microsecond-scale cell
            // is diluted instead of multiplying that cell's mean.
            min_batch_s: 20e-3,
            hop_batch_s: 2e-3,
            seed: 7,
            platform: PlatformConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityCell {
    pub chain_len: usize,
    pub replicas: usize,
    pub reps: usize,
    pub central_mean_s: f64,
    pub central_std_s: f64,
    /// Label extensions of one solve; deterministic.
    pub central_extensions: usize,
    /// One full hop sequence, n sidecar decisions back to back.
    pub sidecar_seq_mean_s: f64,
    /// Mean over stages of one isolated sidecar decision.
    pub sidecar_hop_mean_s: f64,
    pub sidecar_hop_std_s: f64,
    #[serde(skip)]
    pub central_samples: Vec<f64>,
    #[serde(skip)]
    pub sidecar_hop_samples: Vec<f64>,
}

fn timed<T>(min_batch_s: f64, mut f: impl FnMut() -> T) -> f64 {
    let started = Instant::now();
    let mut iters = 0u64;
    loop {
        black_box(f());
        iters += 1;
        let elapsed = started.elapsed().as_secs_f64();
        if elapsed >= min_batch_s {
            return elapsed / iters as f64;
        }
    }
}

/// A cell ready to be timed: its instance plus the query each sidecar along
/// the greedy walk sees.
struct Prepared {
    inst: Instance,
    floors: ChainFloors,
    extensions: usize,
    /// `(here, remaining budget)` per stage.
    hops: Vec<(HostId, f64)>,
}

fn prepare(platform: &Platform, inst: Instance) -> Result<Prepared, Error> {
    let cands = inst.candidate_slices();
    let floors = ChainFloors::new(platform, &inst.chain, &cands);
    let extensions =
        centralized_solve_with(&inst.chain, &cands, &inst.metrics, platform, inst.origin, SolverOptions::default())
            .stats
            .extensions;
    let policy = SidecarPolicy::default();
    let Ok(walk) = walk_with_floors(&inst.chain, &cands, &inst.metrics, platform, inst.origin, &policy, &floors) else {
        let (n, r) = (inst.chain.len(), cands.first().map_or(0, |c| c.len()));
        return Err(Error::Engine(EngineError(format!("synthetic instance ({n}, {r}) rejected by the sidecar walk"))));
    };
    let mut here = inst.origin;
    let mut elapsed = 0.0;
    let hops = walk
        .iter()
        .map(|h| {
            let q = (here, inst.chain.latency_budget - elapsed);
            here = h.host_id;
            elapsed += h.est_latency;
            q
        })
        .collect();
    drop(cands);
    Ok(Prepared {
        inst,
        floors,
        extensions,
        hops,
    })
}

/// One repetition: `(solve, hop sequence, mean isolated hop)` seconds.
fn sample(platform: &Platform, p: &Prepared, options: &ComplexityOptions) -> (f64, f64, f64) {
    let inst = &p.inst;
    let cands = inst.candidate_slices();
    let policy = SidecarPolicy::default();
    let central = timed(options.min_batch_s, || {
        centralized_solve_with(&inst.chain, &cands, &inst.metrics, platform, inst.origin, SolverOptions::default())
    });
    let seq = timed(options.min_batch_s, || {
        walk_with_floors(&inst.chain, &cands, &inst.metrics, platform, inst.origin, &policy, &p.floors)
    });
    let per_stage: Vec<f64> = p
        .hops
        .iter()
        .enumerate()
        .map(|(stage, &(here, remaining_budget))| {
            let q = HopQuery {
                stage,
                chain: &inst.chain,
                candidates: cands[stage],
                here,
                remaining_budget,
                floor_after: p.floors.after(stage),
            };
            timed(options.hop_batch_s, || sidecar_next_hop(&q, &inst.metrics, platform, &policy))
        })
        .collect();
    (central, seq, mean(&per_stage))
}

fn summarize_cell(p: &Prepared, samples: &[(f64, f64, f64)]) -> ComplexityCell {
    let central: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let seq: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let hop: Vec<f64> = samples.iter().map(|s| s.2).collect();
    ComplexityCell {
        chain_len: p.inst.chain.len(),
        replicas: p.inst.candidates.first().map_or(0, Vec::len),
        reps: samples.len(),
        central_mean_s: mean(&central),
        central_std_s: std_dev(&central),
        central_extensions: p.extensions,
        sidecar_seq_mean_s: mean(&seq),
        sidecar_hop_mean_s: mean(&hop),
        sidecar_hop_std_s: std_dev(&hop),
        central_samples: central,
        sidecar_hop_samples: hop,
    }
}

pub fn bench_cell(platform: &Platform, inst: &Instance, options: &ComplexityOptions) -> Result<ComplexityCell, Error> {
    let p = prepare(platform, inst.clone())?;
    let samples: Vec<_> = (0..options.reps).map(|_| sample(platform, &p, options)).collect();
    Ok(summarize_cell(&p, &samples))
}

/// Times every `(n, R)` pair, row-major in `chains`. Repetitions are
/// interleaved: each one sweeps the whole grid before the next starts, so
/// slow drift in the host spreads over all cells instead of biasing a few.
pub fn bench_complexity(chains: &[usize], replicas: &[usize], options: &ComplexityOptions) -> Result<Vec<ComplexityCell>, Error> {
    if options.reps == 0 {
        return Err(ConfigError::new("reps", "must be >= 1").into());
    }
    if chains.is_empty() || replicas.is_empty() || chains.contains(&0) || replicas.contains(&0) {
        return Err(ConfigError::new("grid", "chain lengths and replica counts must be non-empty and >= 1").into());
    }
    let platform = build_platform(&options.platform)?;
    let n_max = *chains.iter().max().expect("non-empty");
    let r_max = *replicas.iter().max().expect("non-empty");
    let master = synthetic_instance(&platform, n_max, r_max, options.seed)?;
    let mut prepared = Vec::with_capacity(chains.len() * replicas.len());
    for &n in chains {
        for &r in replicas {
            prepared.push(prepare(&platform, master.prefix(n, r)?)?);
        }
    }
    let mut samples = vec![Vec::with_capacity(options.reps); prepared.len()];
    for _ in 0..options.reps {
        for (p, s) in prepared.iter().zip(&mut samples) {
            s.push(sample(&platform, p, options));
        }
    }
    Ok(prepared.iter().zip(&samples).map(|(p, s)| summarize_cell(p, s)).collect())
}

pub const COMPLEXITY_HEADER: [&str; 9] = [
    "chain_len",
    "replicas",
    "reps",
    "central_mean_s",
    "central_std_s",
    "central_extensions",
    "sidecar_seq_mean_s",
    "sidecar_hop_mean_s",
    "sidecar_hop_std_s",
];

fn surface(cells: &[ComplexityCell], value: impl Fn(&ComplexityCell) -> f64) -> (Vec<String>, Vec<String>, Vec<Vec<f64>>) {
    let mut chains: Vec<usize> = cells.iter().map(|c| c.chain_len).collect();
    let mut reps: Vec<usize> = cells.iter().map(|c| c.replicas).collect();
    chains.sort_unstable();
    chains.dedup();
    reps.sort_unstable();
    reps.dedup();
    // Longest chains on top.
    let grid = chains
        .iter()
        .rev()
        .map(|&n| {
            reps.iter()
                .map(|&r| {
                    cells
                        .iter()
                        .find(|c| c.chain_len == n && c.replicas == r)
                        .map_or(f64::NAN, &value)
                })
                .collect()
        })
        .collect();
    (
        reps.iter().map(usize::to_string).collect(),
        chains.iter().rev().map(usize::to_string).collect(),
        grid,
    )
}

/// `complexity.csv`, `central_surface.svg`, `sidecar_surface.svg`.
pub fn write_complexity(dir: &Path, cells: &[ComplexityCell]) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(&dir.join("complexity.csv"), cells, &COMPLEXITY_HEADER)?;
    let (cols, rows, grid) = surface(cells, |c| c.central_mean_s);
    write_svg(
        &dir.join("central_surface.svg"),
        &heatmap("Centralized solve time (s)", "replicas per service", "chain length", &cols, &rows, &grid),
    )?;
    let (cols, rows, grid) = surface(cells, |c| c.sidecar_hop_mean_s);
    write_svg(
        &dir.join("sidecar_surface.svg"),
        &heatmap("Sidecar per-hop decision time (s)", "replicas per service", "chain length", &cols, &rows, &grid),
    )
}
