use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-based node index. Files and the CLI use 1-based labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_label(label: u32) -> Self {
        assert!(label >= 1, "node labels start at 1");
        NodeId(label - 1)
    }

    pub fn label(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Index of a directed link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A directed bit pipe.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub bandwidth_bps: f64,
    pub prop_delay_s: f64,
    /// The opposite direction of the same physical link.
    pub reverse: LinkId,
}

impl Link {
    pub fn transmission_time(&self, bits: u64) -> f64 {
        bits as f64 / self.bandwidth_bps
    }
}

/// One bidirectional link as written in a topology file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub a: u32,
    pub b: u32,
    pub bandwidth_bps: f64,
    pub prop_delay_s: f64,
}

/// On-disk topology format. Node labels run from 1 to `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
    pub nodes: u32,
    pub links: Vec<LinkSpec>,
}

/// Connected directed graph where every link has its reverse.
#[derive(Debug, Clone)]
pub struct Topology {
    name: String,
    node_count: usize,
    links: Vec<Link>,
    /// Outgoing links per node, sorted by neighbor id.
    out: Vec<Vec<LinkId>>,
}

impl Topology {
    /// Builds a topology from bidirectional link specs, mirroring each one.
    pub fn new(name: impl Into<String>, node_count: u32, specs: &[LinkSpec]) -> Result<Self> {
        let n = node_count as usize;
        if n < 2 {
            return Err(Error::InvalidTopology(format!(
                "need at least 2 nodes, got {n}"
            )));
        }
        let mut links: Vec<Link> = Vec::with_capacity(specs.len() * 2);
        let mut out: Vec<Vec<LinkId>> = vec![Vec::new(); n];
        for s in specs {
            if s.a < 1 || s.b < 1 || s.a as usize > n || s.b as usize > n {
                return Err(Error::InvalidTopology(format!(
                    "link {}-{} references a node outside 1..={n}",
                    s.a, s.b
                )));
            }
            if s.a == s.b {
                return Err(Error::InvalidTopology(format!("self loop at node {}", s.a)));
            }
            if !(s.bandwidth_bps > 0.0) || !s.bandwidth_bps.is_finite() {
                return Err(Error::InvalidTopology(format!(
                    "link {}-{}: bandwidth must be positive",
                    s.a, s.b
                )));
            }
            if !(s.prop_delay_s >= 0.0) || !s.prop_delay_s.is_finite() {
                return Err(Error::InvalidTopology(format!(
                    "link {}-{}: propagation delay must be nonnegative",
                    s.a, s.b
                )));
            }
            let (a, b) = (NodeId::from_label(s.a), NodeId::from_label(s.b));
            if out[a.index()]
                .iter()
                .any(|l| links[l.index()].to == b)
            {
                return Err(Error::InvalidTopology(format!(
                    "duplicate link {}-{}",
                    s.a, s.b
                )));
            }
            let fwd = LinkId(links.len() as u32);
            let rev = LinkId(fwd.0 + 1);
            for (from, to, reverse) in [(a, b, rev), (b, a, fwd)] {
                out[from.index()].push(LinkId(links.len() as u32));
                links.push(Link {
                    from,
                    to,
                    bandwidth_bps: s.bandwidth_bps,
                    prop_delay_s: s.prop_delay_s,
                    reverse,
                });
            }
        }
        for o in &mut out {
            o.sort_by_key(|l| links[l.index()].to);
        }
        let topo = Topology {
            name: name.into(),
            node_count: n,
            links,
            out,
        };
        if let Some(unreached) = topo.hop_distances(NodeId(0)).iter().position(|d| d.is_none()) {
            return Err(Error::InvalidTopology(format!(
                "graph is disconnected: node {} unreachable from node 1",
                unreached + 1
            )));
        }
        Ok(topo)
    }

    pub fn from_file(file: &TopologyFile) -> Result<Self> {
        Self::new(
            file.name.clone().unwrap_or_else(|| "custom".into()),
            file.nodes,
            &file.links,
        )
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(json)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count as u32).map(NodeId)
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    /// Outgoing links of `node`, ordered by neighbor id.
    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out[node.index()]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.out[node.index()].len()
    }

    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.out[node.index()]
            .iter()
            .map(move |l| self.links[l.index()].to)
    }

    pub fn link_between(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.out[from.index()]
            .iter()
            .copied()
            .find(|l| self.links[l.index()].to == to)
    }

    /// Position of the link towards `to` among the outgoing links of `from`.
    pub fn neighbor_slot(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.out[from.index()]
            .iter()
            .position(|l| self.links[l.index()].to == to)
    }

    pub fn total_bandwidth_bps(&self) -> f64 {
        self.links.iter().map(|l| l.bandwidth_bps).sum()
    }

    /// Breadth-first hop counts from `src`; `None` for unreachable nodes.
    pub fn hop_distances(&self, src: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count];
        dist[src.index()] = Some(0);
        let mut frontier = VecDeque::from([src]);
        while let Some(u) = frontier.pop_front() {
            let du = dist[u.index()].unwrap();
            for v in self.neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    frontier.push_back(v);
                }
            }
        }
        dist
    }

    pub fn to_file(&self) -> TopologyFile {
        let links = self
            .links
            .iter()
            .filter(|l| l.from < l.to)
            .map(|l| LinkSpec {
                a: l.from.label(),
                b: l.to.label(),
                bandwidth_bps: l.bandwidth_bps,
                prop_delay_s: l.prop_delay_s,
            })
            .collect();
        TopologyFile {
            name: Some(self.name.clone()),
            note: None,
            nodes: self.node_count as u32,
            links,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: u32, b: u32) -> LinkSpec {
        LinkSpec {
            a,
            b,
            bandwidth_bps: 1e6,
            prop_delay_s: 0.001,
        }
    }

    #[test]
    fn mirrors_links() {
        let t = Topology::new("t", 3, &[spec(1, 2), spec(2, 3)]).unwrap();
        assert_eq!(t.link_count(), 4);
        for (i, l) in t.links().iter().enumerate() {
            let r = t.link(l.reverse);
            assert_eq!((r.from, r.to), (l.to, l.from));
            assert_eq!(r.reverse, LinkId(i as u32));
        }
        assert_eq!(
            t.neighbors(NodeId(1)).collect::<Vec<_>>(),
            vec![NodeId(0), NodeId(2)]
        );
    }

    #[test]
    fn rejects_disconnected() {
        let err = Topology::new("t", 4, &[spec(1, 2), spec(3, 4)]).unwrap_err();
        assert!(err.to_string().contains("disconnected"));
    }

    #[test]
    fn rejects_bad_links() {
        assert!(Topology::new("t", 2, &[spec(1, 1)]).is_err());
        assert!(Topology::new("t", 2, &[spec(1, 3)]).is_err());
        assert!(Topology::new("t", 2, &[spec(1, 2), spec(2, 1)]).is_err());
        let mut s = spec(1, 2);
        s.bandwidth_bps = 0.0;
        assert!(Topology::new("t", 2, &[s.clone()]).is_err());
        s.bandwidth_bps = 1.0;
        s.prop_delay_s = -1.0;
        assert!(Topology::new("t", 2, &[s]).is_err());
    }

    #[test]
    fn parses_file_format() {
        let json = r#"{"nodes": 2, "links": [{"a": 1, "b": 2, "bandwidth_bps": 8, "prop_delay_s": 0}]}"#;
        let t = Topology::from_json_str(json).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.link_count(), 2);
        assert_eq!(t.link(LinkId(0)).transmission_time(8), 1.0);
        let bad = r#"{"nodes": 2, "links": [], "extra": 1}"#;
        assert!(Topology::from_json_str(bad).is_err());
    }
}
