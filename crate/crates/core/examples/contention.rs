//! Fluid processor sharing: oversubscription and a mid-flight join.

use meshsim::engine::{advance_cpu, HostCpuState, TaskKey};
use meshsim::platform::{build_platform, PlatformConfig};

fn main() -> meshsim::Result<()> {
    let one_core = build_platform(&PlatformConfig {
        hosts_total: 1,
        regions: 1,
        cores_per_host: 1,
        ..PlatformConfig::default()
    })?;
    let spec = &one_core.hosts()[0];
    let mut cpu = HostCpuState::new(spec, 0.0);
    cpu.start(0.0, TaskKey(0), 1e10);
    cpu.start(0.5, TaskKey(1), 1e10);
    for c in advance_cpu(&mut cpu, 5.0) {
        println!("task {:?} done at {:.3} s", c.key.0, c.at);
    }

    let full = build_platform(&PlatformConfig {
        hosts_total: 1,
        regions: 1,
        ..PlatformConfig::default()
    })?;
    for n in [12, 24, 48, 96] {
        let mut cpu = HostCpuState::new(&full.hosts()[0], 0.0);
        for k in 0..n {
            cpu.start(0.0, TaskKey(k), 1e10);
        }
        let done = cpu.advance(100.0);
        println!(
            "{n:>3} tasks on 24 cores: all done at {:.2} s, {:.0} J",
            done.last().map_or(0.0, |c| c.at),
            cpu.energy_j()
        );
    }
    Ok(())
}
