use serde::{Deserialize, Serialize};

use super::{ConnectivityGraph, NodeId};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: usize,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
}

/// One undirected edge; stands for both directed links.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    pub cap_mbps: u64,
}

pub fn parse_topology(text: &str) -> Result<ConnectivityGraph> {
    let file: TopologyFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = file.nodes.len();
    let mut seen = vec![false; n];
    for node in &file.nodes {
        if node.id >= n {
            return Err(Error::Parse(format!(
                "node id {} out of range for {n} nodes (ids must be 0..{n})",
                node.id
            )));
        }
        if std::mem::replace(&mut seen[node.id], true) {
            return Err(Error::Parse(format!("duplicate node id {}", node.id)));
        }
    }
    let mut g = ConnectivityGraph::new(n);
    for node in &file.nodes {
        g.set_coords(NodeId(node.id), node.x, node.y)?;
    }
    for e in &file.edges {
        if e.u >= n || e.v >= n {
            return Err(Error::Parse(format!("edge {}-{} references unknown node", e.u, e.v)));
        }
        g.add_edge(NodeId(e.u), NodeId(e.v), Rational::from_integer(e.cap_mbps.into()))?;
    }
    Ok(g)
}

/// Serializes to the JSON topology format. Fails if a capacity is not integral.
pub fn serialize_topology(g: &ConnectivityGraph) -> Result<String> {
    let nodes = g
        .nodes()
        .map(|n| {
            let (x, y) = g.coords(n);
            NodeEntry { id: n.0, x, y }
        })
        .collect();
    let edges = g
        .edges()
        .map(|(u, v, cap)| {
            let cap_mbps = if cap.is_integer() {
                u64::try_from(cap.to_integer()).ok()
            } else {
                None
            };
            cap_mbps
                .map(|cap_mbps| EdgeEntry {
                    u: u.0,
                    v: v.0,
                    cap_mbps,
                })
                .ok_or_else(|| Error::Invariant(format!("capacity {cap} of {u}-{v} is not an integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out =
        serde_json::to_string_pretty(&TopologyFile { nodes, edges }).map_err(|e| Error::Parse(e.to_string()))?;
    out.push('\n');
    Ok(out)
}
