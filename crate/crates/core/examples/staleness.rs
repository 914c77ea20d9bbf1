//! How often stale metadata changes a sidecar decision, by propagation delay.

use meshsim::bench::{run_scenario, ScenarioConfig};
use meshsim::metadata::MetadataConfig;

fn main() -> meshsim::Result<()> {
    let mut cfg = ScenarioConfig::default().with_rate(1000.0);
    cfg.workload.duration_s = 2.0;
    cfg.run.audit = true;
    for delay in [0.0, 0.01, 0.1, 1.0] {
        cfg.metadata = MetadataConfig {
            metadata_interval_s: 0.0,
            intra_region_delay_s: delay,
            inter_region_delay_s: delay,
        };
        let out = run_scenario(&cfg)?;
        println!(
            "delay {delay:>5} s: {:>5} of {:>5} decisions differ from ground truth, {} dropped, mean makespan {:.4} s",
            out.stats.mismatches, out.stats.decisions, out.summary.dropped, out.summary.makespan_mean_s
        );
    }
    Ok(())
}
