//! Greedy hop-by-hop routing next to the exact optimum on the same state.

use meshsim::bench::complexity::synthetic_instance;
use meshsim::platform::{build_platform, PlatformConfig};
use meshsim::sched::central::centralized_solve;
use meshsim::sched::sidecar::{sidecar_walk, SidecarPolicy};

fn main() -> meshsim::Result<()> {
    let platform = build_platform(&PlatformConfig::desk_scale())?;
    for seed in 0..5 {
        let inst = synthetic_instance(&platform, 4, 8, seed)?;
        let cands = inst.candidate_slices();
        let opt = centralized_solve(&inst.chain, &cands, &inst.metrics, &platform, inst.origin);
        for w_lat in [0.0, 1.0, 100.0] {
            let policy = SidecarPolicy {
                w_lat,
                ..SidecarPolicy::default()
            };
            let hops = sidecar_walk(&inst.chain, &cands, &inst.metrics, &platform, inst.origin, &policy);
            let (carbon, latency) = hops.as_ref().map_or((f64::NAN, f64::NAN), |h| {
                (h.iter().map(|d| d.carbon).sum::<f64>(), h.iter().map(|d| d.est_latency).sum::<f64>())
            });
            println!(
                "seed {seed} w_lat {w_lat:>5}: greedy {carbon:.4} g / {latency:.4} s, optimum {:.4} g",
                opt.as_ref().map_or(f64::NAN, |p| p.total_cost)
            );
        }
    }
    Ok(())
}
