//! Mean makespan against request rate for both schedulers; writes CSVs and an
//! SVG under `target/makespan_sweep`.

use std::path::Path;

use meshsim::bench::sweep::{sweep_rates, write_sweep};
use meshsim::bench::ScenarioConfig;
use meshsim::engine::SchedulerKind;

fn main() -> meshsim::Result<()> {
    let mut cfg = ScenarioConfig::default();
    cfg.workload.duration_s = 5.0;
    let sweep = sweep_rates(&cfg, &[1.0, 10.0, 100.0, 1000.0, 1500.0])?;
    for kind in SchedulerKind::BOTH {
        let line: Vec<String> = sweep
            .series(kind)
            .iter()
            .map(|s| format!("{}:{:.3}", s.rate_rps, s.makespan_mean_s))
            .collect();
        println!("{kind:>13}  {}  (spread {:.2})", line.join("  "), sweep.spread(kind));
    }
    let out = Path::new("target/makespan_sweep");
    write_sweep(out, &sweep)?;
    println!("wrote {}", out.display());
    Ok(())
}
