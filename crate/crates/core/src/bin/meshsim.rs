use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use meshsim::bench::complexity::{bench_complexity, write_complexity, ComplexityOptions};
use meshsim::bench::scenario::{rows, run_scenario, write_requests_csv, write_summaries_csv};
use meshsim::bench::sweep::{sweep_rates, write_sweep};
use meshsim::bench::ScenarioConfig;
use meshsim::Error;

#[derive(Parser)]
#[command(name = "meshsim", version, about = "Simulate centralized vs sidecar scheduling of microservice chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-request and summary CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run both schedulers over a list of request rates.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time both policies on synthetic instances over an (n, R) grid.
    BenchComplexity {
        #[arg(long, value_delimiter = ',', required = true)]
        chains: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        replicas: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, seed, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.workload.seed = seed;
            }
            let output = run_scenario(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_requests_csv(&out.join("requests.csv"), &rows(&output))?;
            write_summaries_csv(&out.join("summary.csv"), std::slice::from_ref(&output.summary))?;
            let s = &output.summary;
            println!(
                "{} @ {} rps: {}/{} completed, mean makespan {:.6} s (p99 {:.6} s), {:.3} gCO2",
                s.scheduler, s.rate_rps, s.completed, s.generated, s.makespan_mean_s, s.makespan_p99_s, s.total_carbon_g
            );
        }
        Command::Sweep { config, rates, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let sweep = sweep_rates(&cfg, &rates)?;
            write_sweep(&out, &sweep)?;
            println!("{:>14} {:>10} {:>10} {:>8} {:>12} {:>12}", "scheduler", "rate", "completed", "dropped", "mean_s", "p99_s");
            for s in &sweep.summaries {
                println!(
                    "{:>14} {:>10} {:>10} {:>8} {:>12.6} {:>12.6}",
                    s.scheduler.name(),
                    s.rate_rps,
                    s.completed,
                    s.dropped,
                    s.makespan_mean_s,
                    s.makespan_p99_s
                );
            }
        }
        Command::BenchComplexity {
            chains,
            replicas,
            reps,
            out,
        } => {
            let options = ComplexityOptions {
                reps,
                ..ComplexityOptions::default()
            };
            let cells = bench_complexity(&chains, &replicas, &options)?;
            write_complexity(&out, &cells)?;
            println!("{:>6} {:>6} {:>14} {:>14}", "n", "R", "central_s", "sidecar_hop_s");
            for c in &cells {
                println!("{:>6} {:>6} {:>14.3e} {:>14.3e}", c.chain_len, c.replicas, c.central_mean_s, c.sidecar_hop_mean_s);
            }
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            println!(
                "ok: {} hosts in {} regions, {} services x {} replicas, {} scheduler",
                cfg.platform.hosts_total,
                cfg.platform.regions,
                cfg.workload.services,
                cfg.workload.replicas_per_service,
                cfg.scheduler.kind
            );
        }
    }
    Ok(())
}
