//! Greedy multipath augmentation.
//!
//! Paths are added one at a time. Each candidate is scheduled hop by hop,
//! from the source, into the current frame with [`spatial_reuse`]; it is
//! kept only if the resulting throughput is strictly higher. Committing a
//! path removes the reverse direction of each of its links from routing.

mod dump;
mod search;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{min_hop_distance, ConnectivityGraph, Link, NodeId};
use crate::rational::Rational;
use crate::schedule::{spatial_reuse, AllocationPlan, Schedule};

pub(crate) use search::find_improving_path;
pub use search::{find_best_augmenting_path, improving_search, SearchReport, SEARCH_BUDGET};
pub use validate::{validate, validate_with, InterferenceModel, Violation};

/// An accepted (or candidate) source to destination path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathFlow {
    /// 1-based acceptance order.
    pub id: usize,
    pub links: Vec<Link>,
    /// Smallest link capacity on the path (Mbps); megabits carried per frame.
    pub bottleneck: Rational,
}

impl PathFlow {
    pub fn new(id: usize, links: Vec<Link>) -> Result<Self> {
        let bottleneck = links
            .iter()
            .map(|l| &l.capacity)
            .min()
            .cloned()
            .ok_or_else(|| Error::InfeasiblePath("empty path".into()))?;
        for w in links.windows(2) {
            if w[0].to != w[1].from {
                return Err(Error::InfeasiblePath(format!("{} does not continue {}", w[1], w[0])));
            }
        }
        let path = PathFlow { id, links, bottleneck };
        let nodes = path.nodes();
        let unique: BTreeSet<_> = nodes.iter().collect();
        if unique.len() != nodes.len() {
            return Err(Error::InfeasiblePath("path revisits a node".into()));
        }
        Ok(path)
    }

    pub fn from_nodes(id: usize, g: &ConnectivityGraph, nodes: &[NodeId]) -> Result<Self> {
        let links = nodes
            .windows(2)
            .map(|w| g.link(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        PathFlow::new(id, links)
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = self.links.iter().map(|l| l.from).collect();
        if let Some(last) = self.links.last() {
            nodes.push(last.to);
        }
        nodes
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    pub fn source(&self) -> NodeId {
        self.links[0].from
    }

    pub fn destination(&self) -> NodeId {
        self.links[self.links.len() - 1].to
    }
}

impl fmt::Display for PathFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self.nodes().iter().map(ToString::to_string).collect();
        write!(f, "p({}): {} bottleneck={}", self.id, nodes.join("->"), self.bottleneck)
    }
}

/// A path together with the plans that would schedule it into the current frame.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub path: PathFlow,
    /// One plan per link, in path order; plan `k` assumes plans `0..k` were applied.
    pub plans: Vec<AllocationPlan>,
    /// Frame time added by this path.
    pub delta: Rational,
    pub new_throughput: Rational,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub source: NodeId,
    pub destination: NodeId,
    pub paths: Vec<PathFlow>,
    pub schedule: Schedule,
    /// Directions removed from routing because the opposite direction carries flow.
    pub deleted_routing_links: BTreeSet<(NodeId, NodeId)>,
    /// Megabits delivered per frame (sum of bottlenecks).
    pub total_flow: Rational,
    /// Mbps; zero for the empty solution.
    pub throughput: Rational,
}

impl Solution {
    pub fn new(source: NodeId, destination: NodeId) -> Self {
        Solution {
            source,
            destination,
            paths: Vec::new(),
            schedule: Schedule::new(),
            deleted_routing_links: BTreeSet::new(),
            total_flow: Rational::zero(),
            throughput: Rational::zero(),
        }
    }

    pub fn total_duration(&self) -> Rational {
        self.schedule.total_duration()
    }
}

/// Megabits per frame over frame length.
pub fn throughput(total_flow: &Rational, total_time: &Rational) -> Result<Rational> {
    if total_time.is_zero() {
        return Err(Error::ZeroTime);
    }
    Ok(total_flow / total_time)
}

/// Schedules `links` in order on a copy of `base`, every link carrying
/// `bottleneck` megabits.
pub(crate) fn schedule_links(
    base: &Schedule,
    g: &ConnectivityGraph,
    links: &[Link],
    bottleneck: &Rational,
) -> (Schedule, Vec<AllocationPlan>, Rational) {
    let mut sched = base.clone();
    let mut plans = Vec::with_capacity(links.len());
    let mut delta = Rational::zero();
    for link in links {
        let plan = extend_schedule(&mut sched, g, link, bottleneck);
        delta += &plan.delta;
        plans.push(plan);
    }
    (sched, plans, delta)
}

pub(crate) fn extend_schedule(
    sched: &mut Schedule,
    g: &ConnectivityGraph,
    link: &Link,
    bottleneck: &Rational,
) -> AllocationPlan {
    let needed = bottleneck / &link.capacity;
    let plan = spatial_reuse(sched, g, link, &needed);
    sched.apply_plan(&plan).expect("plan computed against this schedule");
    plan
}

/// Evaluates `links` as the next path without touching `sol`.
pub fn schedule_path(sol: &Solution, g: &ConnectivityGraph, links: &[Link]) -> Result<Candidate> {
    let path = PathFlow::new(sol.paths.len() + 1, links.to_vec())?;
    if path.source() != sol.source || path.destination() != sol.destination {
        return Err(Error::InfeasiblePath(format!(
            "path runs {}->{}, solution needs {}->{}",
            path.source(),
            path.destination(),
            sol.source,
            sol.destination
        )));
    }
    for l in &path.links {
        match g.capacity(l.from, l.to) {
            Some(c) if *c == l.capacity => {}
            _ => return Err(Error::InfeasiblePath(format!("{l} is not a link of the graph"))),
        }
        if sol.deleted_routing_links.contains(&l.key()) {
            return Err(Error::InfeasiblePath(format!(
                "{}->{} was removed from routing",
                l.from, l.to
            )));
        }
    }
    let (_, plans, delta) = schedule_links(&sol.schedule, g, &path.links, &path.bottleneck);
    let new_throughput = throughput(&(&sol.total_flow + &path.bottleneck), &(sol.total_duration() + &delta))?;
    Ok(Candidate {
        path,
        plans,
        delta,
        new_throughput,
    })
}

/// Strict improvement test; the empty solution accepts any positive rate.
pub fn accept(sol: &Solution, cand: &Candidate) -> bool {
    cand.new_throughput.is_positive() && cand.new_throughput > sol.throughput
}

/// Applies an accepted candidate.
pub fn commit(sol: &mut Solution, cand: Candidate) -> Result<()> {
    if !accept(sol, &cand) {
        return Err(Error::Invariant(format!(
            "candidate throughput {} does not improve on {}",
            cand.new_throughput, sol.throughput
        )));
    }
    if cand.path.id != sol.paths.len() + 1 {
        return Err(Error::StalePlan);
    }
    let mut sched = sol.schedule.clone();
    for plan in &cand.plans {
        sched.apply_plan(plan)?;
    }
    sol.schedule = sched;
    for l in &cand.path.links {
        sol.deleted_routing_links.insert((l.to, l.from));
    }
    sol.total_flow += &cand.path.bottleneck;
    sol.throughput = throughput(&sol.total_flow, &sol.schedule.total_duration())?;
    sol.paths.push(cand.path);
    Ok(())
}

/// Adds improving paths until none is left.
pub fn solve_multipath(g: &ConnectivityGraph, s: NodeId, d: NodeId) -> Result<Solution> {
    if s == d {
        g.check_node(s)?;
        return Err(Error::SameNode(s));
    }
    if min_hop_distance(g, s, d)?.is_none() {
        return Err(Error::NoPath(s, d));
    }
    let mut sol = Solution::new(s, d);
    while let Some(cand) = find_improving_path(&sol, g) {
        commit(&mut sol, cand)?;
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn chain(len: usize, cap: Rational) -> ConnectivityGraph {
        ConnectivityGraph::from_edges(len + 1, (0..len).map(|i| (i, i + 1, cap.clone()))).unwrap()
    }

    fn chain_links(g: &ConnectivityGraph, len: usize) -> Vec<Link> {
        (0..len).map(|i| g.link(NodeId(i), NodeId(i + 1)).unwrap()).collect()
    }

    #[test]
    fn throughput_anchors() {
        assert_eq!(throughput(&ratio(11, 2), &ratio(5, 2)).unwrap(), ratio(11, 5));
        let t = throughput(&int(11), &ratio(7, 2)).unwrap();
        assert_eq!(t, ratio(22, 7));
        assert_eq!(crate::rational::format_decimal(&t, 3), "3.143");
        assert_eq!(throughput(&int(0), &int(1)).unwrap(), int(0));
        assert_eq!(throughput(&int(1), &int(0)), Err(Error::ZeroTime));
    }

    #[test]
    fn two_hop_mixed_rates() {
        let g = ConnectivityGraph::from_edges(3, [(0, 1, int(11)), (1, 2, ratio(11, 2))]).unwrap();
        let sol = Solution::new(NodeId(0), NodeId(2));
        let cand = schedule_path(&sol, &g, &chain_links(&g, 2)).unwrap();
        assert_eq!(cand.path.bottleneck, ratio(11, 2));
        assert_eq!(cand.plans[0].needed, ratio(1, 2));
        assert_eq!(cand.plans[1].needed, int(1));
        assert_eq!(cand.delta, ratio(3, 2));
        assert_eq!(cand.new_throughput, ratio(11, 3));
    }

    #[test]
    fn six_hop_chain_uses_three_slots() {
        let g = chain(6, int(12));
        let sol = Solution::new(NodeId(0), NodeId(6));
        let cand = schedule_path(&sol, &g, &chain_links(&g, 6)).unwrap();
        assert_eq!(cand.delta, int(3));
        assert_eq!(cand.new_throughput, int(4));
    }

    #[test]
    fn repeating_a_path_is_rejected() {
        let g = chain(4, int(12));
        let mut sol = Solution::new(NodeId(0), NodeId(4));
        let first = schedule_path(&sol, &g, &chain_links(&g, 4)).unwrap();
        commit(&mut sol, first).unwrap();
        let again = schedule_path(&sol, &g, &chain_links(&g, 4)).unwrap();
        assert_eq!(again.delta, int(3));
        assert_eq!(again.new_throughput, sol.throughput);
        assert!(!accept(&sol, &again));
        assert!(commit(&mut sol, again).is_err());
    }

    #[test]
    fn accept_is_strict() {
        let g = chain(1, int(10));
        let sol = Solution::new(NodeId(0), NodeId(1));
        let mk = |tp: Rational| Candidate {
            path: PathFlow::new(1, chain_links(&g, 1)).unwrap(),
            plans: vec![],
            delta: int(1),
            new_throughput: tp,
        };
        assert!(accept(&sol, &mk(int(1))));
        assert!(!accept(&sol, &mk(int(0))));
        let mut later = Solution::new(NodeId(0), NodeId(1));
        later.total_flow = ratio(11, 2);
        later.throughput = ratio(11, 5);
        assert!(accept(&later, &mk(ratio(22, 7))));
        assert!(!accept(&later, &mk(ratio(11, 5))));
        later.total_flow = int(11);
        later.throughput = ratio(22, 7);
        assert!(!accept(&later, &mk(ratio(24, 11))));
    }

    #[test]
    fn commit_prunes_reverse_directions() {
        // S=0, then 1, 8, D=9 on a 4-hop detour via 5 so that 0->1 and 8->9 can share a slot
        let g = ConnectivityGraph::from_edges(
            10,
            [
                (0, 1, int(11)),
                (1, 5, ratio(11, 2)),
                (5, 8, ratio(11, 2)),
                (8, 9, int(11)),
            ],
        )
        .unwrap();
        let mut sol = Solution::new(NodeId(0), NodeId(9));
        let path = PathFlow::from_nodes(1, &g, &[NodeId(0), NodeId(1), NodeId(5), NodeId(8), NodeId(9)]).unwrap();
        let cand = schedule_path(&sol, &g, &path.links).unwrap();
        commit(&mut sol, cand).unwrap();
        let expect: BTreeSet<_> = [(1, 0), (5, 1), (8, 5), (9, 8)]
            .into_iter()
            .map(|(a, b)| (NodeId(a), NodeId(b)))
            .collect();
        assert_eq!(sol.deleted_routing_links, expect);
        // 0->1 and 8->9 share the first 1/2 s slot: frame is 1/2 + 1 + 1
        assert_eq!(sol.total_duration(), ratio(5, 2));
        assert_eq!(sol.throughput, ratio(11, 5));
        assert!(validate(&sol, &g).is_empty());
        let reverse = [g.link(NodeId(9), NodeId(8)).unwrap()];
        assert!(schedule_path(&sol, &g, &reverse).is_err());
    }

    #[test]
    fn schedule_path_rejects_bad_paths() {
        let g = chain(3, int(5));
        let sol = Solution::new(NodeId(0), NodeId(3));
        assert!(matches!(schedule_path(&sol, &g, &[]), Err(Error::InfeasiblePath(_))));
        let gap = [
            g.link(NodeId(0), NodeId(1)).unwrap(),
            g.link(NodeId(2), NodeId(3)).unwrap(),
        ];
        assert!(matches!(schedule_path(&sol, &g, &gap), Err(Error::InfeasiblePath(_))));
        let short = chain_links(&g, 2);
        assert!(matches!(schedule_path(&sol, &g, &short), Err(Error::InfeasiblePath(_))));
    }

    #[test]
    fn solve_errors() {
        let g = ConnectivityGraph::from_edges(4, [(0, 1, int(5)), (2, 3, int(5))]).unwrap();
        assert_eq!(
            solve_multipath(&g, NodeId(0), NodeId(3)).unwrap_err(),
            Error::NoPath(NodeId(0), NodeId(3))
        );
        assert_eq!(
            solve_multipath(&g, NodeId(1), NodeId(1)).unwrap_err(),
            Error::SameNode(NodeId(1))
        );
        assert_eq!(
            solve_multipath(&g, NodeId(0), NodeId(9)).unwrap_err(),
            Error::UnknownNode(NodeId(9))
        );
    }

    #[test]
    fn single_edge() {
        let g = chain(1, int(11));
        let sol = solve_multipath(&g, NodeId(0), NodeId(1)).unwrap();
        assert_eq!(sol.paths.len(), 1);
        assert_eq!(sol.throughput, int(11));
    }
}
