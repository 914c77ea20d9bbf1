//! Per-request latency components under each scheduler.

use meshsim::bench::{run_scenario, ScenarioConfig};
use meshsim::engine::SchedulerKind;

fn main() -> meshsim::Result<()> {
    let base = ScenarioConfig::default().with_rate(5.0);
    for kind in SchedulerKind::BOTH {
        let out = run_scenario(&base.with_kind(kind))?;
        let rec = out.records.iter().find(|r| r.is_completed()).expect("light load completes");
        let twl: f64 = rec.twl().iter().sum();
        let proc: f64 = rec.proc_latencies().iter().sum();
        println!(
            "{kind}: makespan {:.6} = sched {:.6} + transfers {twl:.6} + processing {proc:.6} + sidecar {:.6}",
            rec.makespan().unwrap_or(f64::NAN),
            rec.sched_delay(),
            rec.total_sidecar()
        );
    }
    Ok(())
}
