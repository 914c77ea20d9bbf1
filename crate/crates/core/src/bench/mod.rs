//! Scenario files, runs, sweeps and timing benchmarks.

pub mod complexity;
pub mod config;
pub mod plot;
pub mod scenario;
pub mod stats;
pub mod sweep;

pub use complexity::{bench_complexity, ComplexityCell, ComplexityOptions};
pub use config::ScenarioConfig;
pub use scenario::{run_scenario, RequestRow, RunSummary, Scenario, ScenarioOutput};
pub use sweep::{sweep_rates, SweepOutput};
