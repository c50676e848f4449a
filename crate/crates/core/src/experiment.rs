//! Multi-trial experiments, aggregation, ant-rate sweeps and result files.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{Error, Result};
use crate::metrics::{series_csv, Summary, WindowPoint};
use crate::sim::Simulation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u32,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub topology: String,
    pub summary: Summary,
    #[serde(skip)]
    pub series: Vec<WindowPoint>,
}

/// Mean and sample standard deviation over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub topology: String,
    pub trials: u32,
    pub throughput_bps: Stat,
    pub offered_bps: Stat,
    pub delay_mean_s: Option<Stat>,
    pub delay_p90_s: Option<Stat>,
    pub delay_p99_s: Option<Stat>,
    pub overhead: Stat,
    pub power: Option<Stat>,
    pub data_drops: Stat,
    /// Pooled 90th percentile of the merged delay histograms (bin upper edge).
    pub pooled_delay_p90_s: Option<f64>,
    /// Trial-averaged windowed series.
    pub series: Vec<WindowPoint>,
}

pub fn run_trial(cfg: &ExperimentConfig, trial: u32) -> Result<TrialResult> {
    let seed = cfg.trial_seed(trial);
    let mut sim = Simulation::from_config(cfg, seed)?;
    sim.run()?;
    Ok(TrialResult {
        trial,
        seed,
        algorithm: cfg.algorithm,
        topology: sim.network().topology().name().to_string(),
        summary: sim.summary(),
        series: sim.series(),
    })
}

/// Runs all trials of `cfg`, in parallel, returning them in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect()
}

fn stat_of(trials: &[TrialResult], f: impl Fn(&Summary) -> Option<f64>) -> Option<Stat> {
    let v: Option<Vec<f64>> = trials.iter().map(|t| f(&t.summary)).collect();
    Stat::of(&v?)
}

pub fn aggregate(trials: &[TrialResult]) -> Aggregate {
    assert!(!trials.is_empty());
    let first = &trials[0];
    let mut hist = first.summary.histogram.clone();
    for t in &trials[1..] {
        hist.merge(&t.summary.histogram);
    }
    let len = trials.iter().map(|t| t.series.len()).max().unwrap_or(0);
    let series = (0..len)
        .map(|i| {
            let pts: Vec<&WindowPoint> = trials.iter().filter_map(|t| t.series.get(i)).collect();
            let n = pts.len() as f64;
            let delays: Vec<f64> = pts.iter().filter_map(|p| p.mean_delay_s).collect();
            WindowPoint {
                time_s: pts[0].time_s,
                throughput_bps: pts.iter().map(|p| p.throughput_bps).sum::<f64>() / n,
                mean_delay_s: (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64),
                offered_bps: pts.iter().map(|p| p.offered_bps).sum::<f64>() / n,
            }
        })
        .collect();
    Aggregate {
        algorithm: first.algorithm,
        topology: first.topology.clone(),
        trials: trials.len() as u32,
        throughput_bps: stat_of(trials, |s| Some(s.throughput_bps)).expect("nonempty"),
        offered_bps: stat_of(trials, |s| Some(s.offered_bps)).expect("nonempty"),
        delay_mean_s: stat_of(trials, |s| s.delay_mean_s),
        delay_p90_s: stat_of(trials, |s| s.delay_p90_s),
        delay_p99_s: stat_of(trials, |s| s.delay_p99_s),
        overhead: stat_of(trials, |s| Some(s.overhead)).expect("nonempty"),
        power: stat_of(trials, |s| s.power),
        data_drops: stat_of(trials, |s| Some((s.drops.buffer + s.drops.ttl) as f64)).expect("nonempty"),
        pooled_delay_p90_s: hist.quantile(0.9),
        series,
    }
}

/// One point of an ant launch-interval sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub launch_interval_s: f64,
    pub throughput_bps: f64,
    pub delay_p90_s: Option<f64>,
    pub power: Option<f64>,
    /// Power divided by the largest power in the sweep.
    pub normalized_power: Option<f64>,
    pub overhead: f64,
}

/// Runs `cfg` with AntNet once per launch interval. Power is computed from
/// the trial-mean throughput and 90th-percentile delay.
pub fn sweep_ant_rate(cfg: &ExperimentConfig, intervals: &[f64]) -> Result<Vec<SweepPoint>> {
    if intervals.is_empty() {
        return Err(Error::config("rates", "at least one launch interval is required"));
    }
    let mut points = Vec::with_capacity(intervals.len());
    for &dg in intervals {
        let mut c = cfg.clone();
        c.algorithm = Algorithm::AntNet;
        c.antnet.launch_interval_s = dg;
        c.validate()?;
        let agg = aggregate(&run_experiment(&c)?);
        let p90 = agg.delay_p90_s.map(|s| s.mean);
        points.push(SweepPoint {
            launch_interval_s: dg,
            throughput_bps: agg.throughput_bps.mean,
            delay_p90_s: p90,
            power: crate::metrics::power(agg.throughput_bps.mean, p90),
            normalized_power: None,
            overhead: agg.overhead.mean,
        });
    }
    let max = points.iter().filter_map(|p| p.power).fold(0.0, f64::max);
    if max > 0.0 {
        for p in &mut points {
            p.normalized_power = p.power.map(|v| v / max);
        }
    }
    Ok(points)
}

/// Runs `cfg` once per mean session inter-arrival time, one aggregate per
/// load point.
pub fn sweep_load(cfg: &ExperimentConfig, msia_s: &[f64]) -> Result<Vec<Aggregate>> {
    if msia_s.is_empty() {
        return Err(Error::config("msia", "at least one load point is required"));
    }
    msia_s
        .iter()
        .map(|&m| {
            let mut c = cfg.clone();
            c.traffic.msia_s = m;
            Ok(aggregate(&run_experiment(&c)?))
        })
        .collect()
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `trial_<i>.json`, `series_trial_<i>.csv`, `aggregate.json` and
/// `series.csv` (trial mean) into `dir`.
pub fn write_outputs(dir: &Path, trials: &[TrialResult], agg: &Aggregate) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for t in trials {
        write(
            &dir.join(format!("trial_{}.json", t.trial)),
            &serde_json::to_string_pretty(t)?,
        )?;
        write(&dir.join(format!("series_trial_{}.csv", t.trial)), &series_csv(&t.series))?;
    }
    write(&dir.join("aggregate.json"), &serde_json::to_string_pretty(agg)?)?;
    write(&dir.join("series.csv"), &series_csv(&agg.series))
}
