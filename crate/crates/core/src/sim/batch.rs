use std::io::Write;

use rayon::prelude::*;

use super::engine::{run_traced, RunMetrics, Scenario};
use super::{Mode, SimConfig, World};
use crate::error::{Error, Result};

pub const RESULTS_CSV_HEADER: &str =
    "run_id,mode,seed,makespan,accuracy,publisher_spend,worker_net_total,mn_net_total";
pub const SUMMARY_CSV_HEADER: &str = "mode,metric,mean,variance,runs";

/// Sample mean and unbiased sample variance (0 for a single sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub variance: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let variance = if n < 2 {
            0.0
        } else {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        };
        Stat { mean, variance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub mode: Mode,
    pub runs: Vec<RunMetrics>,
    pub makespan: Stat,
    pub accuracy: Stat,
}

impl BatchSummary {
    fn metric_columns(&self) -> [(&'static str, Stat); 5] {
        let stat = |f: fn(&RunMetrics) -> f64| Stat::from_samples(&self.runs.iter().map(f).collect::<Vec<_>>());
        [
            ("makespan", self.makespan),
            ("accuracy", self.accuracy),
            ("publisher_spend", stat(|r| r.publisher_spend)),
            ("worker_net_total", stat(|r| r.worker_net_total)),
            ("mn_net_total", stat(|r| r.mn_net_total)),
        ]
    }
}

/// Runs seeds `seed .. seed + runs` of `config.mode`. Runs execute in
/// parallel; results keep seed order.
pub fn run_batch(config: &SimConfig, world: &World) -> Result<BatchSummary> {
    config.validate()?;
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let scenario = Scenario::generate(config, world, seed)?;
            let mut metrics = run_traced(config, &world.topology, scenario, seed)?.metrics;
            metrics.run_id = i as u32;
            Ok(metrics)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(config.mode, runs))
}

pub fn summarize(mode: Mode, runs: Vec<RunMetrics>) -> BatchSummary {
    let makespans: Vec<f64> = runs.iter().map(|r| r.makespan).collect();
    let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    BatchSummary {
        mode,
        makespan: Stat::from_samples(&makespans),
        accuracy: Stat::from_samples(&accuracies),
        runs,
    }
}

pub fn write_results_csv<W: Write>(out: &mut W, batches: &[BatchSummary]) -> Result<()> {
    let wrap = |e| Error::io("writing results", e);
    writeln!(out, "{RESULTS_CSV_HEADER}").map_err(wrap)?;
    for b in batches {
        for r in &b.runs {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.run_id,
                r.mode.as_str(),
                r.seed,
                r.makespan,
                r.accuracy,
                r.publisher_spend,
                r.worker_net_total,
                r.mn_net_total
            )
            .map_err(wrap)?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: &mut W, batches: &[BatchSummary]) -> Result<()> {
    let wrap = |e| Error::io("writing summary", e);
    writeln!(out, "{SUMMARY_CSV_HEADER}").map_err(wrap)?;
    for b in batches {
        for (metric, stat) in b.metric_columns() {
            writeln!(
                out,
                "{},{metric},{},{},{}",
                b.mode.as_str(),
                stat.mean,
                stat.variance,
                b.runs.len()
            )
            .map_err(wrap)?;
        }
    }
    Ok(())
}
