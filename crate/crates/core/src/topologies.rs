//! Built-in testbeds and hop-distance statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::topology::Topology;

const SIMPLENET: &str = include_str!("../data/simplenet.json");
const NSFNET: &str = include_str!("../data/nsfnet.json");
const NTTNET: &str = include_str!("../data/nttnet.json");

pub const BUILTIN_NAMES: [&str; 3] = ["simplenet", "nsfnet", "nttnet"];

pub fn builtin(name: &str) -> Result<Topology> {
    let json = match name.to_ascii_lowercase().as_str() {
        "simplenet" => SIMPLENET,
        "nsfnet" => NSFNET,
        "nttnet" => NTTNET,
        _ => return Err(Error::UnknownTopology(name.to_string())),
    };
    Topology::from_json_str(json)
}

pub fn simplenet() -> Topology {
    builtin("simplenet").expect("bundled topology is valid")
}

pub fn nsfnet() -> Topology {
    builtin("nsfnet").expect("bundled topology is valid")
}

pub fn nttnet() -> Topology {
    builtin("nttnet").expect("bundled topology is valid")
}

/// Resolves a built-in name, or else reads a topology file.
pub fn resolve(name_or_path: &str) -> Result<Topology> {
    match builtin(name_or_path) {
        Err(Error::UnknownTopology(_)) if Path::new(name_or_path).exists() => {
            Topology::load(name_or_path)
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyStats {
    /// Mean shortest-path length in hops over ordered pairs of distinct nodes.
    pub mean_hops: f64,
    /// Population standard deviation of the same distances.
    pub std_hops: f64,
    pub nodes: usize,
}

pub fn stats(topo: &Topology) -> Result<TopologyStats> {
    let mut dists = Vec::new();
    for s in topo.nodes() {
        for (t, d) in topo.hop_distances(s).into_iter().enumerate() {
            if t == s.index() {
                continue;
            }
            match d {
                Some(d) => dists.push(d as f64),
                None => {
                    return Err(Error::InvalidTopology(format!(
                        "graph is disconnected: node {} unreachable from node {}",
                        t + 1,
                        s.label()
                    )))
                }
            }
        }
    }
    let n = dists.len() as f64;
    let mean = dists.iter().sum::<f64>() / n;
    let var = dists.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    Ok(TopologyStats {
        mean_hops: mean,
        std_hops: var.sqrt(),
        nodes: topo.node_count(),
    })
}
