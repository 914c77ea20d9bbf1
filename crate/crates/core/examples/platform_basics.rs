//! Routes, transfer times, power and per-stage carbon on the default topology.

use meshsim::platform::{build_platform, power_draw, HostId, PlatformConfig};
use meshsim::sched::cost::stage_carbon;

fn main() -> meshsim::Result<()> {
    let platform = build_platform(&PlatformConfig::desk_scale())?;
    let a = HostId(0);
    for b in [HostId(0), HostId(1), HostId(50)] {
        let hops = platform.route(a, b).len();
        let t = platform.transfer_time(1e6, a, b);
        println!("{a} -> {b}: {hops} links, 1 MB in {:.6} s", t);
    }

    let host = platform.host(a);
    for u in [0.0, 0.5, 1.0] {
        println!("power at {:>3.0}% load: {:.1} W", u * 100.0, power_draw(host, u, true)?);
    }
    for region in platform.regions() {
        let h = platform.hosts().iter().find(|h| h.region_id == region.id).expect("non-empty region");
        println!(
            "region {} ({:.1} gCO2/J): 1 Gflop stage costs {:.4} gCO2",
            region.id,
            region.carbon_intensity,
            stage_carbon(&platform, h.id, 1e9)
        );
    }
    Ok(())
}
