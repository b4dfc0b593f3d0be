//! Brute-force reference machinery for small instances.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{ConnectivityGraph, NodeId};
use crate::optimizer::{accept, commit, schedule_path, PathFlow, Solution, Violation};
use crate::rational::Rational;

/// Paths enumerated beyond this many are refused.
pub const MAX_ENUMERATED_PATHS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_nodes: usize,
    /// Longest ordered path sequence replayed.
    pub max_paths_considered: usize,
    pub max_hops: usize,
    /// Upper limit on `schedule_path` evaluations across all sequences.
    pub max_replays: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 12,
            max_paths_considered: 4,
            max_hops: 11,
            max_replays: 2_000_000,
        }
    }
}

impl OracleBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_nodes == 0 || self.max_paths_considered == 0 || self.max_hops == 0 || self.max_replays == 0 {
            return Err(Error::Invariant("oracle budget fields must be positive".into()));
        }
        Ok(())
    }
}

/// Every node-simple `s -> d` path with at most `max_hops` links, in
/// lexicographic order of node sequences.
pub fn enumerate_simple_paths(g: &ConnectivityGraph, s: NodeId, d: NodeId, max_hops: usize) -> Result<Vec<PathFlow>> {
    g.check_node(s)?;
    g.check_node(d)?;
    if s == d {
        return Err(Error::SameNode(s));
    }
    let mut found = Vec::new();
    let mut route = vec![s];
    let mut used = vec![false; g.node_count()];
    used[s.index()] = true;
    walk(g, d, max_hops, &mut route, &mut used, &mut found)?;
    found
        .into_iter()
        .enumerate()
        .map(|(i, nodes)| PathFlow::from_nodes(i + 1, g, &nodes))
        .collect()
}

fn walk(
    g: &ConnectivityGraph,
    d: NodeId,
    max_hops: usize,
    route: &mut Vec<NodeId>,
    used: &mut [bool],
    found: &mut Vec<Vec<NodeId>>,
) -> Result<()> {
    let here = *route.last().expect("route starts at the source");
    if here == d {
        if found.len() >= MAX_ENUMERATED_PATHS {
            return Err(Error::BudgetExceeded(format!(
                "more than {MAX_ENUMERATED_PATHS} simple paths"
            )));
        }
        found.push(route.clone());
        return Ok(());
    }
    if route.len() > max_hops {
        return Ok(());
    }
    let next: Vec<NodeId> = g.neighbors(here).filter(|v| !used[v.index()]).collect();
    for v in next {
        used[v.index()] = true;
        route.push(v);
        walk(g, d, max_hops, route, used, found)?;
        route.pop();
        used[v.index()] = false;
    }
    Ok(())
}

/// Highest throughput reachable by replaying the accept and commit pipeline
/// over every ordered sequence of distinct simple paths, up to
/// `max_paths_considered` paths long. Sequences stop at the first path that
/// is rejected or no longer routable.
pub fn best_over_orderings(g: &ConnectivityGraph, s: NodeId, d: NodeId, budget: &OracleBudget) -> Result<Rational> {
    budget.validate()?;
    if g.node_count() > budget.max_nodes {
        return Err(Error::BudgetExceeded(format!(
            "{} nodes exceeds the oracle limit of {}",
            g.node_count(),
            budget.max_nodes
        )));
    }
    let paths = enumerate_simple_paths(g, s, d, budget.max_hops)?;
    if paths.is_empty() {
        return Err(Error::NoPath(s, d));
    }
    let mut replay = Replay {
        g,
        paths: &paths,
        used: vec![false; paths.len()],
        budget,
        replays: 0,
        best: Rational::zero(),
    };
    replay.extend(&Solution::new(s, d))?;
    Ok(replay.best)
}

struct Replay<'a> {
    g: &'a ConnectivityGraph,
    paths: &'a [PathFlow],
    used: Vec<bool>,
    budget: &'a OracleBudget,
    replays: u64,
    best: Rational,
}

impl Replay<'_> {
    fn extend(&mut self, sol: &Solution) -> Result<()> {
        if sol.throughput > self.best {
            self.best = sol.throughput.clone();
        }
        if sol.paths.len() >= self.budget.max_paths_considered {
            return Ok(());
        }
        for i in 0..self.paths.len() {
            if self.used[i] {
                continue;
            }
            self.replays += 1;
            if self.replays > self.budget.max_replays {
                return Err(Error::BudgetExceeded(format!(
                    "more than {} path replays",
                    self.budget.max_replays
                )));
            }
            let Ok(cand) = schedule_path(sol, self.g, &self.paths[i].links) else {
                continue;
            };
            if !accept(sol, &cand) {
                continue;
            }
            let mut next = sol.clone();
            commit(&mut next, cand)?;
            self.used[i] = true;
            self.extend(&next)?;
            self.used[i] = false;
        }
        Ok(())
    }
}

/// Re-checks the constraint families straight from the per-slot flow
/// variables `f[i][j]`, written independently of the main validator.
///
/// Per slot: flow bound `f_ij <= c_ij d`, a sender receives nothing, a
/// receiver sends nothing and no other neighbor of the receiver transmits,
/// a node transmits on at most one link. Over the frame: relays forward
/// exactly what they receive and the source emits what the destination
/// absorbs. Finally the reported throughput must be delivered flow over
/// frame length.
pub fn check_constraints_literal(sol: &Solution, g: &ConnectivityGraph) -> Vec<Violation> {
    let n = g.node_count();
    let mut found = Vec::new();
    let mut total_in = vec![Rational::zero(); n];
    let mut total_out = vec![Rational::zero(); n];
    let mut frame = Rational::zero();

    for slot in sol.schedule.slots() {
        let k = slot.id;
        frame += &slot.duration;
        if !slot.duration.is_positive() {
            found.push(Violation::NonPositiveDuration { slot: k });
        }
        // f[i][j] for this slot
        let mut f = vec![vec![Rational::zero(); n]; n];
        for a in &slot.allocations {
            let (i, j) = (a.from.index(), a.to.index());
            if i >= n || j >= n || !g.is_adjacent(a.from, a.to) {
                found.push(Violation::UnknownLink {
                    slot: k,
                    from: a.from,
                    to: a.to,
                });
                continue;
            }
            if !f[i][j].is_zero() {
                found.push(Violation::DuplicateAllocation {
                    slot: k,
                    from: a.from,
                    to: a.to,
                });
            }
            f[i][j] += &a.flow;
        }

        let sends = |i: usize, f: &Vec<Vec<Rational>>| (0..n).filter(|&j| f[i][j].is_positive()).count();
        let receives = |i: usize, f: &Vec<Vec<Rational>>| (0..n).any(|j| f[j][i].is_positive());
        for m in 0..n {
            if sends(m, &f) > 1 {
                found.push(Violation::MultipleSends {
                    slot: k,
                    node: NodeId(m),
                });
            }
            if sends(m, &f) > 0 && receives(m, &f) {
                found.push(Violation::SendAndReceive {
                    slot: k,
                    node: NodeId(m),
                });
            }
        }
        for m in 0..n {
            for nn in 0..n {
                if !f[m][nn].is_positive() {
                    continue;
                }
                let cap = g.capacity(NodeId(m), NodeId(nn)).expect("checked above");
                let limit = cap * &slot.duration;
                if f[m][nn] > limit {
                    found.push(Violation::FlowExceedsCapacity {
                        slot: k,
                        from: NodeId(m),
                        to: NodeId(nn),
                        flow: f[m][nn].clone(),
                        limit,
                    });
                }
                for i in g.neighbors(NodeId(nn)) {
                    let i = i.index();
                    if i != m && sends(i, &f) > 0 {
                        found.push(Violation::ReceiverInterference {
                            slot: k,
                            sender: NodeId(m),
                            receiver: NodeId(nn),
                            interferer: NodeId(i),
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                total_out[i] += &f[i][j];
                total_in[j] += &f[i][j];
            }
        }
    }

    let (s, d) = (sol.source.index(), sol.destination.index());
    for r in 0..n {
        if r != s && r != d && total_in[r] != total_out[r] {
            found.push(Violation::Conservation {
                node: NodeId(r),
                inflow: total_in[r].clone(),
                outflow: total_out[r].clone(),
            });
        }
    }
    if s < n && d < n {
        if total_out[s] != total_in[d] {
            found.push(Violation::SourceDestinationMismatch {
                sent: total_out[s].clone(),
                received: total_in[d].clone(),
            });
        }
        let delivered = if frame.is_zero() {
            Rational::zero()
        } else {
            &total_in[d] / &frame
        };
        if delivered != sol.throughput {
            found.push(Violation::ThroughputMismatch {
                reported: sol.throughput.clone(),
                computed: delivered,
            });
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{solve_multipath, validate};
    use crate::rational::{int, ratio};
    use crate::schedule::{Allocation, SlotId, TimeSlot};

    #[test]
    fn path_counts() {
        let diamond =
            ConnectivityGraph::from_edges(4, [(0, 1, int(5)), (0, 2, int(5)), (1, 3, int(5)), (2, 3, int(5))]).unwrap();
        assert_eq!(
            enumerate_simple_paths(&diamond, NodeId(0), NodeId(3), 10)
                .unwrap()
                .len(),
            2
        );
        let chain = ConnectivityGraph::from_edges(4, [(0, 1, int(5)), (1, 2, int(5)), (2, 3, int(5))]).unwrap();
        assert_eq!(
            enumerate_simple_paths(&chain, NodeId(0), NodeId(3), 10).unwrap().len(),
            1
        );
        assert_eq!(
            enumerate_simple_paths(&chain, NodeId(0), NodeId(3), 2).unwrap().len(),
            0
        );
        let k5 =
            ConnectivityGraph::from_edges(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j, int(5))))).unwrap();
        let paths = enumerate_simple_paths(&k5, NodeId(0), NodeId(4), 4).unwrap();
        assert_eq!(paths.len(), 16);
        let mut sorted: Vec<_> = paths.iter().map(PathFlow::nodes).collect();
        sorted.sort();
        assert_eq!(sorted, paths.iter().map(PathFlow::nodes).collect::<Vec<_>>());
    }

    #[test]
    fn orderings_cover_greedy() {
        let g = ConnectivityGraph::from_edges(2, [(0, 1, int(11))]).unwrap();
        let best = best_over_orderings(&g, NodeId(0), NodeId(1), &OracleBudget::default()).unwrap();
        assert_eq!(best, int(11));
        let g = ConnectivityGraph::from_edges(
            5,
            [
                (0, 1, int(11)),
                (1, 4, int(5)),
                (0, 2, int(6)),
                (2, 4, int(9)),
                (0, 3, int(7)),
                (3, 4, int(8)),
                (1, 2, int(5)),
            ],
        )
        .unwrap();
        let best = best_over_orderings(&g, NodeId(0), NodeId(4), &OracleBudget::default()).unwrap();
        let greedy = solve_multipath(&g, NodeId(0), NodeId(4)).unwrap();
        assert!(best >= greedy.throughput);
    }

    #[test]
    fn budget_limits() {
        let g = ConnectivityGraph::from_edges(13, (0..12).map(|i| (i, i + 1, int(5)))).unwrap();
        assert!(matches!(
            best_over_orderings(&g, NodeId(0), NodeId(12), &OracleBudget::default()),
            Err(Error::BudgetExceeded(_))
        ));
        let bad = OracleBudget {
            max_hops: 0,
            ..OracleBudget::default()
        };
        assert!(bad.validate().is_err());
    }

    fn chain_solution() -> (ConnectivityGraph, Solution) {
        let g = ConnectivityGraph::from_edges(4, [(0, 1, int(6)), (1, 2, int(6)), (2, 3, int(6))]).unwrap();
        let sol = solve_multipath(&g, NodeId(0), NodeId(3)).unwrap();
        (g, sol)
    }

    #[test]
    fn agrees_on_valid_solution() {
        let (g, sol) = chain_solution();
        assert!(check_constraints_literal(&sol, &g).is_empty());
        assert!(validate(&sol, &g).is_empty());
    }

    #[test]
    fn doubled_flow_breaks_conservation() {
        let (g, mut sol) = chain_solution();
        sol.schedule.slot_mut(1).unwrap().allocations[0].flow *= int(2);
        let found = check_constraints_literal(&sol, &g);
        assert!(found.iter().any(|v| matches!(v, Violation::FlowExceedsCapacity { .. })));
        assert!(found.iter().any(|v| matches!(v, Violation::Conservation { .. })));
    }

    #[test]
    fn two_senders_next_to_a_receiver() {
        // 1 -> 2 while 3, also adjacent to 2, transmits to 4
        let g =
            ConnectivityGraph::from_edges(5, [(0, 1, int(5)), (1, 2, int(5)), (2, 3, int(5)), (3, 4, int(5))]).unwrap();
        let mut sol = Solution::new(NodeId(0), NodeId(4));
        let slot = TimeSlot {
            id: SlotId(1),
            duration: int(1),
            allocations: vec![
                Allocation {
                    from: NodeId(1),
                    to: NodeId(2),
                    flow: int(5),
                },
                Allocation {
                    from: NodeId(3),
                    to: NodeId(4),
                    flow: int(5),
                },
            ],
        };
        sol.schedule = crate::schedule::Schedule::from_slots(vec![slot]).unwrap();
        sol.throughput = ratio(5, 1);
        let found = check_constraints_literal(&sol, &g);
        assert!(found.iter().any(|v| matches!(
            v,
            Violation::ReceiverInterference {
                receiver: NodeId(2),
                interferer: NodeId(3),
                ..
            }
        )));
    }
}
