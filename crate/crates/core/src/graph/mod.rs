//! Connectivity graph of a static multirate mesh.
//!
//! Links are directed but always come in pairs with equal capacity. The
//! physical graph is immutable once built; per-run pruning of routing
//! directions happens on a [`RoutingView`], which never affects who can hear
//! whom.

mod generate;
mod io;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub use generate::{generate_random_topology, TopologySpec};
pub use io::{parse_topology, serialize_topology, TopologyFile};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

/// A directed link with its capacity in Mbps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: Rational,
}

impl Link {
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.from, self.to)
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}@{}", self.from, self.to, self.capacity)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityGraph {
    node_count: usize,
    coords: Vec<(f64, f64)>,
    adjacency: Vec<BTreeMap<NodeId, Rational>>,
    adjacent: Vec<bool>,
}

impl ConnectivityGraph {
    pub fn new(node_count: usize) -> Self {
        ConnectivityGraph {
            node_count,
            coords: vec![(0.0, 0.0); node_count],
            adjacency: vec![BTreeMap::new(); node_count],
            adjacent: vec![false; node_count * node_count],
        }
    }

    /// Builds a graph from undirected edges; each edge yields both directions.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut g = ConnectivityGraph::new(node_count);
        for (u, v, cap) in edges {
            g.add_edge(NodeId(u), NodeId(v), cap)?;
        }
        Ok(g)
    }

    /// Adds the directed pair `u->v` and `v->u` with the same capacity.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, capacity: Rational) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::Invariant(format!("self-loop on node {u}")));
        }
        if !capacity.is_positive() {
            return Err(Error::Invariant(format!(
                "capacity of {u}-{v} must be positive, got {capacity}"
            )));
        }
        if let Some(existing) = self.capacity(u, v) {
            return Err(if *existing == capacity {
                Error::Invariant(format!("duplicate link {u}-{v}"))
            } else {
                Error::Invariant(format!("asymmetric capacity on {u}-{v}: {existing} vs {capacity}"))
            });
        }
        self.adjacency[u.0].insert(v, capacity.clone());
        self.adjacency[v.0].insert(u, capacity);
        let n = self.node_count;
        self.adjacent[u.0 * n + v.0] = true;
        self.adjacent[v.0 * n + u.0] = true;
        Ok(())
    }

    pub fn set_coords(&mut self, node: NodeId, x: f64, y: f64) -> Result<()> {
        self.check_node(node)?;
        self.coords[node.0] = (x, y);
        Ok(())
    }

    pub fn coords(&self, node: NodeId) -> (f64, f64) {
        self.coords[node.0]
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    /// Directed link count, i.e. twice the number of undirected edges.
    pub fn link_count(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum()
    }

    /// All directed links ordered by `(from, to)`.
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter().map(move |(v, c)| Link {
                from: NodeId(u),
                to: *v,
                capacity: c.clone(),
            })
        })
    }

    /// Undirected edges `(u, v, cap)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &Rational)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |(v, _)| u < v.0)
                .map(move |(v, c)| (NodeId(u), *v, c))
        })
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Result<Link> {
        self.capacity(from, to)
            .map(|c| Link {
                from,
                to,
                capacity: c.clone(),
            })
            .ok_or(Error::MissingLink(from, to))
    }

    pub fn capacity(&self, from: NodeId, to: NodeId) -> Option<&Rational> {
        self.adjacency.get(from.0).and_then(|m| m.get(&to))
    }

    /// Interference neighborhood N(n), ascending by id.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[node.0].keys().copied()
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        a.0 < self.node_count && b.0 < self.node_count && self.adjacent[a.0 * self.node_count + b.0]
    }

    /// Distinct link capacities, descending.
    pub fn distinct_capacities(&self) -> Vec<Rational> {
        let set: BTreeSet<&Rational> = self.adjacency.iter().flat_map(|m| m.values()).collect();
        set.into_iter().rev().cloned().collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        bfs_hops(self, NodeId(0), |_, _| true).iter().all(Option::is_some)
    }
}

/// Breadth-first hop counts from `start`, following only links accepted by `usable`.
pub(crate) fn bfs_hops<F>(g: &ConnectivityGraph, start: NodeId, usable: F) -> Vec<Option<usize>>
where
    F: Fn(NodeId, NodeId) -> bool,
{
    let mut dist = vec![None; g.node_count()];
    let mut queue = VecDeque::new();
    dist[start.0] = Some(0);
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.0].unwrap_or(0);
        for v in g.neighbors(u) {
            if dist[v.0].is_none() && usable(u, v) {
                dist[v.0] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Minimum hop count from `s` to `d`, or `None` when unreachable.
pub fn min_hop_distance(g: &ConnectivityGraph, s: NodeId, d: NodeId) -> Result<Option<usize>> {
    g.check_node(s)?;
    g.check_node(d)?;
    Ok(bfs_hops(g, s, |_, _| true)[d.0])
}

/// The graph as seen by the path search: the physical graph minus the
/// directions pruned after earlier paths were committed.
#[derive(Clone, Debug)]
pub struct RoutingView<'g> {
    graph: &'g ConnectivityGraph,
    deleted: BTreeSet<(NodeId, NodeId)>,
}

impl<'g> RoutingView<'g> {
    pub fn new(graph: &'g ConnectivityGraph) -> Self {
        RoutingView {
            graph,
            deleted: BTreeSet::new(),
        }
    }

    pub fn with_deleted(graph: &'g ConnectivityGraph, deleted: &BTreeSet<(NodeId, NodeId)>) -> Self {
        RoutingView {
            graph,
            deleted: deleted.clone(),
        }
    }

    pub fn graph(&self) -> &'g ConnectivityGraph {
        self.graph
    }

    pub fn delete_link(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        if self.graph.capacity(from, to).is_none() {
            return Err(Error::MissingLink(from, to));
        }
        self.deleted.insert((from, to));
        Ok(())
    }

    pub fn deleted(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.deleted
    }

    pub fn is_routable(&self, from: NodeId, to: NodeId) -> bool {
        self.graph.capacity(from, to).is_some() && !self.deleted.contains(&(from, to))
    }

    pub fn routing_neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.graph
            .neighbors(node)
            .filter(move |&v| !self.deleted.contains(&(node, v)))
    }

    /// Hop counts from every node to `target` over routable links.
    pub fn hops_to(&self, target: NodeId) -> Vec<Option<usize>> {
        // walk backwards: u reaches target through v when u->v is routable
        bfs_hops(self.graph, target, |v, u| self.is_routable(u, v))
    }
}
