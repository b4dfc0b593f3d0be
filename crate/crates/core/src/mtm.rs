//! Medium time metric single-path baseline.
//!
//! The route minimizes the sum of `1/c` over its links. Ties go to fewer
//! hops, then to the lexicographically smaller node sequence. Its
//! throughput comes from the same scheduler the multipath search uses,
//! unless the no-reuse variant is requested.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{ConnectivityGraph, NodeId};
use crate::optimizer::{schedule_path, throughput, PathFlow, Solution};
use crate::rational::Rational;

/// How the baseline path is turned into a throughput.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum BaselineScheduling {
    /// The shared first-fit scheduler, with spatial reuse along the path.
    #[default]
    SpatialReuse,
    /// Every hop gets a slot of its own.
    NoReuse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtmResult {
    pub path: PathFlow,
    /// Sum of `1/c` over the path, seconds per megabit.
    pub medium_time_per_bit: Rational,
    pub throughput: Rational,
}

pub fn mtm_path(g: &ConnectivityGraph, s: NodeId, d: NodeId) -> Result<MtmResult> {
    mtm_path_with(g, s, d, BaselineScheduling::SpatialReuse)
}

pub fn mtm_path_with(g: &ConnectivityGraph, s: NodeId, d: NodeId, mode: BaselineScheduling) -> Result<MtmResult> {
    g.check_node(s)?;
    g.check_node(d)?;
    if s == d {
        return Err(Error::SameNode(s));
    }
    let (weight, nodes) = min_medium_time_route(g, s, d).ok_or(Error::NoPath(s, d))?;
    let path = PathFlow::from_nodes(1, g, &nodes)?;
    let tp = match mode {
        BaselineScheduling::SpatialReuse => schedule_path(&Solution::new(s, d), g, &path.links)?.new_throughput,
        BaselineScheduling::NoReuse => {
            let time = path
                .links
                .iter()
                .fold(Rational::zero(), |acc, l| acc + &path.bottleneck / &l.capacity);
            throughput(&path.bottleneck, &time)?
        }
    };
    Ok(MtmResult {
        path,
        medium_time_per_bit: weight,
        throughput: tp,
    })
}

type Label = (Rational, usize, Vec<NodeId>);

/// Label-setting shortest path on `(weight, hops, node sequence)`. Extending
/// two equal-length routes by the same node keeps their order, so the
/// composite key stays consistent with settling nodes greedily.
pub(crate) fn min_medium_time_route(g: &ConnectivityGraph, s: NodeId, d: NodeId) -> Option<(Rational, Vec<NodeId>)> {
    let mut best: Vec<Option<Label>> = vec![None; g.node_count()];
    let mut settled = vec![false; g.node_count()];
    let mut heap = BinaryHeap::new();
    let start: Label = (Rational::zero(), 0, vec![s]);
    best[s.index()] = Some(start.clone());
    heap.push(Reverse(start));
    while let Some(Reverse((w, hops, route))) = heap.pop() {
        let u = *route.last().expect("routes are never empty");
        if settled[u.index()] {
            continue;
        }
        settled[u.index()] = true;
        if u == d {
            return Some((w, route));
        }
        for v in g.neighbors(u) {
            if settled[v.index()] {
                continue;
            }
            let cap = g.capacity(u, v).expect("neighbor link");
            let mut next = route.clone();
            next.push(v);
            let label: Label = (&w + Rational::one() / cap, hops + 1, next);
            if best[v.index()].as_ref().is_none_or(|b| label < *b) {
                best[v.index()] = Some(label.clone());
                heap.push(Reverse(label));
            }
        }
    }
    None
}
