//! Exact minimum-carbon placement for one request, and how the budget moves it.

use meshsim::bench::complexity::synthetic_instance;
use meshsim::platform::{build_platform, PlatformConfig};
use meshsim::sched::central::{centralized_solve_with, SolverOptions};

fn main() -> meshsim::Result<()> {
    let platform = build_platform(&PlatformConfig::desk_scale())?;
    let mut inst = synthetic_instance(&platform, 5, 10, 3)?;
    for budget in [10.0, 0.56, 0.54, 0.52, 0.5] {
        std::sync::Arc::make_mut(&mut inst.chain).latency_budget = budget;
        let sol = centralized_solve_with(
            &inst.chain,
            &inst.candidate_slices(),
            &inst.metrics,
            &platform,
            inst.origin,
            SolverOptions::default(),
        );
        match sol.outcome {
            Ok(path) => {
                let hosts: Vec<String> = path.assignments.iter().map(|a| a.host_id.to_string()).collect();
                println!(
                    "budget {budget:>4} s: {:.4} gCO2, est {:.4} s via {} ({} extensions)",
                    path.total_cost,
                    path.est_latency,
                    hosts.join(" "),
                    sol.stats.extensions
                );
            }
            Err(e) => println!("budget {budget:>4} s: infeasible ({e:?})"),
        }
    }
    Ok(())
}
