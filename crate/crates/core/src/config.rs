//! Experiment configuration files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::antnet::{AntNet, AntNetParams};
use crate::baselines::{
    BellmanFord, BfParams, Daemon, DaemonParams, Ospf, OspfParams, PqRouting, PqrParams, QRouting, QrParams, Spf,
    SpfParams,
};
use crate::error::{Error, Result};
use crate::network::topology::Topology;
use crate::network::NetworkParams;
use crate::routing::RoutingAlgorithm;
use crate::topologies;
use crate::traffic::TrafficSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    AntNet,
    Ospf,
    Spf,
    Bf,
    Qr,
    Pqr,
    Daemon,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::AntNet,
        Algorithm::Ospf,
        Algorithm::Spf,
        Algorithm::Bf,
        Algorithm::Qr,
        Algorithm::Pqr,
        Algorithm::Daemon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::AntNet => "antnet",
            Algorithm::Ospf => "ospf",
            Algorithm::Spf => "spf",
            Algorithm::Bf => "bf",
            Algorithm::Qr => "qr",
            Algorithm::Pqr => "pqr",
            Algorithm::Daemon => "daemon",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Built-in topology name or path to a topology file.
    pub topology: String,
    pub algorithm: Algorithm,
    pub traffic: TrafficSpec,
    pub network: NetworkParams,
    pub run_length_s: f64,
    pub warmup_s: f64,
    pub trials: u32,
    pub master_seed: u64,
    /// Width of the windows in the time series output.
    pub window_s: f64,
    pub output_dir: Option<String>,
    pub antnet: AntNetParams,
    pub ospf: OspfParams,
    pub spf: SpfParams,
    pub bf: BfParams,
    pub qr: QrParams,
    pub pqr: PqrParams,
    pub daemon: DaemonParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: "simplenet".into(),
            algorithm: Algorithm::AntNet,
            traffic: TrafficSpec::default(),
            network: NetworkParams::default(),
            run_length_s: 1000.0,
            warmup_s: 500.0,
            trials: 10,
            master_seed: 1,
            window_s: 5.0,
            output_dir: None,
            antnet: AntNetParams::default(),
            ospf: OspfParams::default(),
            spf: SpfParams::default(),
            bf: BfParams::default(),
            qr: QrParams::default(),
            pqr: PqrParams::default(),
            daemon: DaemonParams::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a config. Unknown keys and bad values are errors
    /// naming the offending key.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json).map_err(|e| {
            let msg = e.to_string();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<document>")
                .to_string();
            Error::config(key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn topology(&self) -> Result<Topology> {
        topologies::resolve(&self.topology).map_err(|e| Error::config("topology", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let topo = self.topology()?;
        if !(self.run_length_s > 0.0 && self.run_length_s.is_finite()) {
            return Err(Error::config("run_length_s", "must be positive"));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s.is_finite()) {
            return Err(Error::config("warmup_s", "must be nonnegative"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err(Error::config("window_s", "must be positive"));
        }
        self.traffic.validate(topo.node_count())?;
        self.network.validate()?;
        self.antnet.validate()?;
        self.ospf.validate()?;
        self.spf.validate()?;
        self.bf.validate()?;
        self.qr.validate()?;
        self.pqr.validate()?;
        self.daemon.validate()
    }

    /// Seed of trial `i`.
    pub fn trial_seed(&self, trial: u32) -> u64 {
        self.master_seed.wrapping_add(trial as u64)
    }

    /// Instantiates the configured routing algorithm on `topo`.
    pub fn build_algorithm(&self, topo: &Topology) -> Result<Box<dyn RoutingAlgorithm>> {
        Ok(match self.algorithm {
            Algorithm::AntNet => Box::new(AntNet::new(topo, self.antnet.clone())?),
            Algorithm::Ospf => Box::new(Ospf::new(topo, self.ospf.clone())?),
            Algorithm::Spf => Box::new(Spf::new(topo, self.spf.clone())?),
            Algorithm::Bf => Box::new(BellmanFord::new(topo, self.bf.clone())?),
            Algorithm::Qr => Box::new(QRouting::new(topo, self.qr.clone())?),
            Algorithm::Pqr => Box::new(PqRouting::new(topo, self.pqr.clone())?),
            Algorithm::Daemon => Box::new(Daemon::new(topo, self.daemon.clone())?),
        })
    }
}
