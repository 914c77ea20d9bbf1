//! Poisson arrivals: counts and inter-arrival statistics per seed.

use meshsim::bench::stats::{mean, std_dev};
use meshsim::workload::arrival_times;

fn main() {
    let (rate, duration) = (100.0, 60.0);
    for seed in 1..=3 {
        let t = arrival_times(rate, duration, seed);
        let gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        println!(
            "seed {seed}: {} arrivals (expect ~{}), gap mean {:.5} s sd {:.5} s",
            t.len(),
            rate * duration,
            mean(&gaps),
            std_dev(&gaps)
        );
    }
}
