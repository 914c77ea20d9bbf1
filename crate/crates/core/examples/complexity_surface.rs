//! A small decision-time surface for both policies; writes CSV and SVG
//! heatmaps under `target/complexity_surface`.

use std::path::Path;

use meshsim::bench::complexity::{bench_complexity, write_complexity, ComplexityOptions};

fn main() -> meshsim::Result<()> {
    let options = ComplexityOptions {
        reps: 3,
        ..ComplexityOptions::default()
    };
    let cells = bench_complexity(&[3, 5, 10, 20], &[5, 10, 20, 50, 100], &options)?;
    println!("{:>4} {:>5} {:>12} {:>12} {:>10}", "n", "R", "central_s", "hop_s", "ext");
    for c in &cells {
        println!(
            "{:>4} {:>5} {:>12.3e} {:>12.3e} {:>10}",
            c.chain_len, c.replicas, c.central_mean_s, c.sidecar_hop_mean_s, c.central_extensions
        );
    }
    let out = Path::new("target/complexity_surface");
    write_complexity(out, &cells)?;
    println!("wrote {}", out.display());
    Ok(())
}
