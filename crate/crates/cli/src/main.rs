use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use antnet_sim::config::{Algorithm, ExperimentConfig};
use antnet_sim::experiment::{aggregate, run_experiment, sweep_ant_rate, sweep_load, write_outputs};
use antnet_sim::topologies;

#[derive(Parser)]
#[command(name = "antnet", version, about = "Packet network routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of an experiment and write the result files.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's algorithm.
        #[arg(long)]
        algorithm: Option<Algorithm>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an AntNet experiment once per ant launch interval.
    SweepRate {
        config: PathBuf,
        /// Launch intervals in seconds.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an experiment once per mean session inter-arrival time.
    SweepLoad {
        config: PathBuf,
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// MSIA values in seconds.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        msia: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print node count and hop-distance statistics of a topology.
    TopoStats {
        /// Built-in name (simplenet, nsfnet, nttnet) or topology file.
        topology: String,
    },
}

fn load(path: &PathBuf, trials: Option<u32>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    cli.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

// Write errors on stdout (a closed pipe) are ignored.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            algorithm,
            trials,
            seed,
        } => {
            let mut cfg = load(&config, trials, seed)?;
            cfg.algorithm = algorithm.unwrap_or(cfg.algorithm);
            let dir = out_dir(out, &cfg);
            let results = run_experiment(&cfg)?;
            let agg = aggregate(&results);
            write_outputs(&dir, &results, &agg)?;
            out!(
                "{} on {}: {} trials, throughput {:.4e} bit/s, p90 delay {}, overhead {:.3e}",
                cfg.algorithm,
                agg.topology,
                agg.trials,
                agg.throughput_bps.mean,
                agg.delay_p90_s
                    .map_or("n/a".to_string(), |s| format!("{:.4} s", s.mean)),
                agg.overhead.mean,
            );
            out!("results written to {}", dir.display());
        }
        Command::SweepRate {
            config,
            rates,
            out,
            trials,
            seed,
        } => {
            let cfg = load(&config, trials, seed)?;
            let dir = out_dir(out, &cfg);
            let points = sweep_ant_rate(&cfg, &rates)?;
            std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
            let path = dir.join("sweep.json");
            std::fs::write(&path, serde_json::to_string_pretty(&points)?)
                .with_context(|| path.display().to_string())?;
            out!("launch_interval_s,normalized_power,overhead");
            for p in &points {
                out!(
                    "{},{},{}",
                    p.launch_interval_s,
                    p.normalized_power.map_or(String::new(), |v| v.to_string()),
                    p.overhead
                );
            }
        }
        Command::SweepLoad {
            config,
            algorithm,
            msia,
            out,
            trials,
            seed,
        } => {
            let mut cfg = load(&config, trials, seed)?;
            cfg.algorithm = algorithm.unwrap_or(cfg.algorithm);
            let dir = out_dir(out, &cfg);
            let points = sweep_load(&cfg, &msia)?;
            std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
            let path = dir.join("load_sweep.json");
            std::fs::write(&path, serde_json::to_string_pretty(&points)?)
                .with_context(|| path.display().to_string())?;
            out!("msia_s,throughput_bps,delay_p90_s,overhead");
            for (m, a) in msia.iter().zip(&points) {
                out!(
                    "{},{},{},{}",
                    m,
                    a.throughput_bps.mean,
                    a.delay_p90_s.map_or(String::new(), |s| s.mean.to_string()),
                    a.overhead.mean
                );
            }
        }
        Command::TopoStats { topology } => {
            let topo = topologies::resolve(&topology)?;
            let s = topologies::stats(&topo)?;
            out!(
                "{}: nodes {}, directed links {}, mean hops {:.3}, std hops {:.3}",
                topo.name(),
                s.nodes,
                topo.link_count(),
                s.mean_hops,
                s.std_hops
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
