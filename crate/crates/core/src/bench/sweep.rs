//! Makespan versus request rate, both schedulers on shared seeds.

use std::path::Path;

use rayon::prelude::*;

use crate::bench::config::ScenarioConfig;
use crate::bench::plot::{line_chart, write_svg, Series};
use crate::bench::scenario::{rows, run_scenario, write_requests_csv, write_summaries_csv, RequestRow, RunSummary};
use crate::engine::SchedulerKind;
use crate::error::{ConfigError, Error};

#[derive(Debug, Clone)]
pub struct SweepOutput {
    /// Ordered by rate, then scheduler.
    pub summaries: Vec<RunSummary>,
    pub requests: Vec<RequestRow>,
}

impl SweepOutput {
    pub fn series(&self, kind: SchedulerKind) -> Vec<&RunSummary> {
        self.summaries.iter().filter(|s| s.scheduler == kind).collect()
    }

    /// Max over min of the mean makespan across rates.
    pub fn spread(&self, kind: SchedulerKind) -> f64 {
        let means: Vec<f64> = self.series(kind).iter().map(|s| s.makespan_mean_s).collect();
        let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = means.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Runs every `(rate, scheduler)` cell; cells execute in parallel.
pub fn sweep_rates(config: &ScenarioConfig, rates: &[f64]) -> Result<SweepOutput, Error> {
    if rates.is_empty() {
        return Err(ConfigError::new("rates", "need at least one rate").into());
    }
    if rates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::new("rates", "must be strictly ascending").into());
    }
    config.validate()?;
    let cells: Vec<(f64, SchedulerKind)> = rates
        .iter()
        .flat_map(|&r| SchedulerKind::BOTH.map(|k| (r, k)))
        .collect();
    let outputs: Vec<_> = cells
        .par_iter()
        .map(|&(rate, kind)| {
            run_scenario(&config.with_rate(rate).with_kind(kind)).map_err(|e| Error::Cell {
                context: format!("{kind} at {rate} rps"),
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;
    let requests = outputs.iter().flat_map(rows).collect();
    Ok(SweepOutput {
        summaries: outputs.into_iter().map(|o| o.summary).collect(),
        requests,
    })
}

pub fn makespan_plot(sweep: &SweepOutput) -> String {
    let series: Vec<Series> = SchedulerKind::BOTH
        .iter()
        .map(|&k| Series {
            name: k.name().to_string(),
            points: sweep.series(k).iter().map(|s| (s.rate_rps, s.makespan_mean_s)).collect(),
        })
        .collect();
    line_chart("Mean makespan vs request rate", "request rate (req/s)", "mean makespan (s)", &series, true, true)
}

/// `sweep_summary.csv`, `sweep_requests.csv` and `makespan_vs_rate.svg`.
pub fn write_sweep(dir: &Path, sweep: &SweepOutput) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_summaries_csv(&dir.join("sweep_summary.csv"), &sweep.summaries)?;
    write_requests_csv(&dir.join("sweep_requests.csv"), &sweep.requests)?;
    write_svg(&dir.join("makespan_vs_rate.svg"), &makespan_plot(sweep))
}
