//! Depth-first branch and bound over simple source to destination paths.
//!
//! Only paths that use at least one link not already carrying flow in the
//! same direction are candidates. Without that, re-running an accepted path
//! can keep nudging the throughput up forever.
//!
//! Each search frame holds the partial path scheduled at its running
//! bottleneck, so a frame that reaches the destination is exactly the
//! candidate [`schedule_path`](super::schedule_path) would produce.
//!
//! Pruning bound: any completion has bottleneck `c <= b_p` and adds at least
//! the prefix's own new time at that bottleneck, so its throughput is at most
//! `max_c (F + c) / (T + delta_prefix(c))` over capacities `c <= b_p`. On an
//! empty frame the allocator is scale invariant (all durations scale with
//! `c`), which collapses the bound to `b_p / delta_p`; otherwise smaller
//! capacities are checked lazily, stopping once `(F + c) / T` can no longer
//! reach the incumbent. Capacities ruled out at a frame stay ruled out below
//! it, and the prefix schedule at each checked capacity is kept so children
//! extend it by one hop instead of rescheduling.
//!
//! The first search starts from the minimum medium time route as incumbent,
//! so even a search cut short by the budget never does worse than it.

use std::cell::OnceCell;
use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{ToPrimitive, Zero};

use super::{extend_schedule, schedule_links, schedule_path, Candidate, PathFlow, Solution};
use crate::graph::{ConnectivityGraph, Link, NodeId, RoutingView};
use crate::mtm::min_medium_time_route;
use crate::rational::Rational;
use crate::schedule::{slot_feasible, Schedule};

/// Frame expansions allowed per search call. Past this the best candidate
/// found so far is returned.
pub const SEARCH_BUDGET: u64 = 2_000;

/// Best next path for `sol`, improving or not; `None` only when no
/// routable simple path exists.
pub fn find_best_augmenting_path(sol: &Solution, g: &ConnectivityGraph) -> Option<Candidate> {
    find_improving_path(sol, g).or_else(|| Searcher::new(sol, g, None).search())
}

/// Best next path among those that raise the throughput.
pub(crate) fn find_improving_path(sol: &Solution, g: &ConnectivityGraph) -> Option<Candidate> {
    improving_search(sol, g).candidate
}

/// Outcome of one improving-path search.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub candidate: Option<Candidate>,
    pub expansions: u64,
    /// True when the search stopped at [`SEARCH_BUDGET`] rather than
    /// exhausting the path space.
    pub truncated: bool,
}

/// Same search as the solver runs for each new path, with its statistics.
pub fn improving_search(sol: &Solution, g: &ConnectivityGraph) -> SearchReport {
    let floor = sol.throughput.clone();
    let mut searcher = Searcher::new(sol, g, Some(floor));
    let candidate = searcher.search();
    SearchReport {
        candidate,
        expansions: searcher.expansions,
        truncated: searcher.expansions >= SEARCH_BUDGET,
    }
}

struct Frame {
    /// Zero at the root.
    bottleneck: Rational,
    /// The prefix scheduled at `bottleneck`.
    schedule: Schedule,
    delta: Rational,
    /// Per entry of `capacities`: whether a completion with that final
    /// bottleneck may still beat the incumbent. Once false it stays false
    /// for every extension, since extending never lowers the new time at a
    /// fixed bottleneck and the incumbent only rises.
    viable: Vec<bool>,
    /// Per entry of `capacities`: the prefix scheduled at that capacity and
    /// its new time, filled on first use.
    at_cap: Vec<OnceCell<(Schedule, Rational)>>,
}

struct Best {
    throughput: Rational,
    nodes: Vec<NodeId>,
    candidate: Candidate,
}

struct Searcher<'a> {
    sol: &'a Solution,
    g: &'a ConnectivityGraph,
    view: RoutingView<'a>,
    floor: Option<Rational>,
    capacities: Vec<Rational>,
    hops_to_dest: Vec<Option<usize>>,
    nodes: Vec<NodeId>,
    links: Vec<Link>,
    /// One frame per prefix of `links`, the root first.
    frames: Vec<Frame>,
    on_path: Vec<bool>,
    best: Option<Best>,
    base_time: Rational,
    expansions: u64,
    /// Per link: existing frame time in slots where it could be placed.
    free_time: HashMap<(NodeId, NodeId), f64>,
    /// `(capacity, free time)` of each link in `links`, as floats.
    link_floats: Vec<(f64, f64)>,
    /// Per entry of `capacities`, per node: least new time any route from
    /// the node to the destination needs at that bottleneck. Empty on an
    /// empty frame.
    rest_time: Vec<Vec<f64>>,
}

impl<'a> Searcher<'a> {
    fn new(sol: &'a Solution, g: &'a ConnectivityGraph, floor: Option<Rational>) -> Self {
        let view = RoutingView::with_deleted(g, &sol.deleted_routing_links);
        let hops_to_dest = view.hops_to(sol.destination);
        Searcher {
            sol,
            g,
            view,
            floor,
            capacities: g.distinct_capacities(),
            hops_to_dest,
            nodes: vec![sol.source],
            links: Vec::new(),
            frames: Vec::new(),
            on_path: vec![false; g.node_count()],
            best: None,
            base_time: sol.schedule.total_duration(),
            expansions: 0,
            free_time: HashMap::new(),
            link_floats: Vec::new(),
            rest_time: Vec::new(),
        }
    }

    /// Fills `rest_time`. A hop needs at least `c / c_l` minus its free time
    /// of new time, so a route needs at least its largest such shortfall; the
    /// minimum over routes is a bottleneck shortest path toward the
    /// destination.
    fn compute_rest_time(&mut self) {
        let n = self.g.node_count();
        let links: Vec<Link> = self.g.links().filter(|l| self.view.is_routable(l.from, l.to)).collect();
        let mut incoming: Vec<Vec<(NodeId, f64, f64)>> = vec![Vec::new(); n];
        for l in &links {
            let free = self.free_time(l.key());
            incoming[l.to.index()].push((l.from, to_f64(&l.capacity), free));
        }
        let dest = self.sol.destination.index();
        self.rest_time = self
            .capacities
            .iter()
            .map(|cap| {
                let cap = to_f64(cap);
                let mut rest = vec![f64::INFINITY; n];
                let mut done = vec![false; n];
                rest[dest] = 0.0;
                for _ in 0..n {
                    let Some(y) = (0..n)
                        .filter(|&v| !done[v] && rest[v].is_finite())
                        .min_by(|&a, &b| rest[a].total_cmp(&rest[b]))
                    else {
                        break;
                    };
                    done[y] = true;
                    for &(x, c, free) in &incoming[y] {
                        let need = (cap / c - free).max(0.0).max(rest[y]);
                        if need < rest[x.index()] {
                            rest[x.index()] = need;
                        }
                    }
                }
                rest
            })
            .collect();
    }

    fn seed_with_medium_time_route(&mut self) {
        let Some((_, nodes)) = min_medium_time_route(self.g, self.sol.source, self.sol.destination) else {
            return;
        };
        let links: Option<Vec<Link>> = nodes.windows(2).map(|w| self.g.link(w[0], w[1]).ok()).collect();
        let Some(cand) = links.and_then(|links| schedule_path(self.sol, self.g, &links).ok()) else {
            return;
        };
        if self.floor.as_ref().is_some_and(|f| cand.new_throughput <= *f) {
            return;
        }
        self.best = Some(Best {
            throughput: cand.new_throughput.clone(),
            nodes,
            candidate: cand,
        });
    }

    fn search(&mut self) -> Option<Candidate> {
        self.hops_to_dest[self.sol.source.index()]?;
        self.on_path[self.sol.source.index()] = true;
        if self.base_time.is_zero() {
            self.seed_with_medium_time_route();
        } else {
            self.compute_rest_time();
        }
        let base = || OnceCell::from((self.sol.schedule.clone(), Rational::zero()));
        let root = Frame {
            bottleneck: Rational::zero(),
            schedule: self.sol.schedule.clone(),
            delta: Rational::zero(),
            viable: vec![true; self.capacities.len()],
            at_cap: (0..self.capacities.len()).map(|_| base()).collect(),
        };
        self.frames.push(root);
        self.expand();
        self.frames.clear();
        self.best.take().map(|b| b.candidate)
    }

    fn expand(&mut self) {
        let here = *self.nodes.last().expect("path starts at the source");
        if here == self.sol.destination {
            self.offer();
            return;
        }
        let mut next: Vec<(Rational, NodeId)> = self
            .view
            .routing_neighbors(here)
            .filter(|v| !self.on_path[v.index()] && self.hops_to_dest[v.index()].is_some())
            .map(|v| (self.g.capacity(here, v).expect("routable link").clone(), v))
            .collect();
        let dist = &self.hops_to_dest;
        next.sort_by(|a, b| {
            dist[a.1.index()]
                .cmp(&dist[b.1.index()])
                .then(b.0.cmp(&a.0))
                .then(a.1.cmp(&b.1))
        });

        for (cap, v) in next {
            if self.expansions >= SEARCH_BUDGET {
                return;
            }
            let link = Link {
                from: here,
                to: v,
                capacity: cap,
            };
            let floats = (to_f64(&link.capacity), self.free_time(link.key()));
            self.links.push(link);
            self.link_floats.push(floats);
            self.nodes.push(v);
            let mut child = self.child_frame();
            self.expansions += 1;
            if !self.prune(&mut child) {
                self.on_path[v.index()] = true;
                self.frames.push(child);
                self.expand();
                self.frames.pop();
                self.on_path[v.index()] = false;
            }
            self.nodes.pop();
            self.links.pop();
            self.link_floats.pop();
        }
    }

    fn cap_index(&self, cap: &Rational) -> usize {
        self.capacities
            .binary_search_by(|c| cap.cmp(c))
            .expect("link capacities are graph capacities")
    }

    /// The first `k` links scheduled at `cap`, memoized in frame `k`.
    fn prefix_at(&self, k: usize, cap: &Rational, i: usize) -> (&Schedule, &Rational) {
        let frame = &self.frames[k];
        if k > 0 && *cap == frame.bottleneck {
            return (&frame.schedule, &frame.delta);
        }
        let (sched, delta) = frame.at_cap[i].get_or_init(|| self.extend_prefix(k - 1, cap, i));
        (sched, delta)
    }

    /// The first `k + 1` links scheduled at `cap`.
    fn extend_prefix(&self, k: usize, cap: &Rational, i: usize) -> (Schedule, Rational) {
        let (sched, delta) = self.prefix_at(k, cap, i);
        let mut sched = sched.clone();
        let plan = extend_schedule(&mut sched, self.g, &self.links[k], cap);
        (sched, delta + &plan.delta)
    }

    /// The current `links` scheduled at `cap`.
    fn schedule_at(&self, cap: &Rational, i: usize) -> (Schedule, Rational) {
        self.extend_prefix(self.links.len() - 1, cap, i)
    }

    /// Frame for the current `links`, derived from the parent frame.
    fn child_frame(&self) -> Frame {
        let parent = self.frames.last().expect("root frame");
        let link = self.links.last().expect("just pushed");
        let bottleneck = if self.links.len() == 1 || link.capacity < parent.bottleneck {
            link.capacity.clone()
        } else {
            parent.bottleneck.clone()
        };
        let bi = self.cap_index(&bottleneck);
        let (schedule, delta) = self.schedule_at(&bottleneck, bi);
        let mut viable = parent.viable.clone();
        viable[..bi].iter_mut().for_each(|v| *v = false);
        Frame {
            bottleneck,
            schedule,
            delta,
            viable,
            at_cap: (0..self.capacities.len()).map(|_| OnceCell::new()).collect(),
        }
    }

    fn ratio(&self, bottleneck: &Rational, delta: &Rational) -> Option<Rational> {
        let time = &self.base_time + delta;
        (!time.is_zero()).then(|| (&self.sol.total_flow + bottleneck) / time)
    }

    fn prune(&self, child: &mut Frame) -> bool {
        let Some(here_ratio) = self.ratio(&child.bottleneck, &child.delta) else {
            return false;
        };
        if self.base_time.is_zero() {
            return !self.may_win(&here_ratio);
        }
        let bi = self.cap_index(&child.bottleneck);
        if self.may_win(&here_ratio) && !self.float_bound_loses(bi, to_f64(&child.delta)) {
            return false;
        }
        child.viable[bi] = false;
        // smaller bottlenecks may fit into existing slots and need less new time
        for i in bi + 1..self.capacities.len() {
            if !child.viable[i] {
                continue;
            }
            let cap = &self.capacities[i];
            let optimistic = (&self.sol.total_flow + cap) / &self.base_time;
            if self.clearly_loses(&optimistic) {
                child.viable[i..].iter_mut().for_each(|v| *v = false);
                break;
            }
            if self.float_bound_loses(i, 0.0) {
                child.viable[i] = false;
                continue;
            }
            let (sched, delta) = self.schedule_at(cap, i);
            let wins = self.ratio(cap, &delta).is_some_and(|r| self.may_win(&r));
            child.at_cap[i] = OnceCell::from((sched, delta));
            if wins {
                return false;
            }
            child.viable[i] = false;
        }
        true
    }

    fn free_time(&mut self, key: (NodeId, NodeId)) -> f64 {
        let (sched, g) = (&self.sol.schedule, self.g);
        *self.free_time.entry(key).or_insert_with(|| {
            sched
                .slots()
                .iter()
                .filter(|slot| slot_feasible(g, slot, key))
                .map(|slot| to_f64(&slot.duration))
                .sum()
        })
    }

    /// Cheap screen for the capacity at index `i`, given a known lower bound
    /// on the new time. A prefix link can take at most its free time from
    /// existing slots and needs new time for the rest; three consecutive path
    /// links pairwise conflict, so their shortfalls occupy disjoint new time.
    /// The remaining route adds its own shortfall bound. The float result
    /// only prunes with a safety margin.
    fn float_bound_loses(&self, i: usize, known: f64) -> bool {
        let cap = to_f64(&self.capacities[i]);
        let incumbent = match (&self.best, &self.floor) {
            (Some(best), _) => to_f64(&best.throughput),
            (None, Some(floor)) => to_f64(floor),
            (None, None) => return false,
        };
        let shortfall: Vec<f64> = self
            .link_floats
            .iter()
            .map(|&(c, free)| (cap / c - free).max(0.0))
            .collect();
        let new_time = shortfall
            .windows(shortfall.len().clamp(1, 3))
            .map(|w| w.iter().sum::<f64>())
            .fold(known, f64::max);
        let here = self.nodes.last().expect("non-empty").index();
        let new_time = new_time.max(self.rest_time[i][here]);
        let bound = (to_f64(&self.sol.total_flow) + cap) / (to_f64(&self.base_time) + new_time);
        bound < incumbent * (1.0 - 1e-9)
    }

    /// Whether committing the current path would remove at least one more
    /// routing direction, i.e. it uses some link no earlier path used.
    fn adds_new_direction(&self) -> bool {
        let deleted = &self.sol.deleted_routing_links;
        self.links.iter().any(|l| !deleted.contains(&(l.to, l.from)))
    }

    fn clearly_loses(&self, bound: &Rational) -> bool {
        match (&self.best, &self.floor) {
            (Some(best), _) => *bound < best.throughput,
            (None, Some(floor)) => bound <= floor,
            (None, None) => false,
        }
    }

    /// Whether some completion with throughput at most `bound` could still
    /// beat the incumbent, honoring the tie-break on hop count and node order.
    fn may_win(&self, bound: &Rational) -> bool {
        match (&self.best, &self.floor) {
            (Some(best), _) => match bound.cmp(&best.throughput) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    let here = *self.nodes.last().expect("non-empty");
                    let remaining = self.hops_to_dest[here.index()].unwrap_or(usize::MAX / 2);
                    let min_hops = self.links.len() + remaining;
                    let best_hops = best.nodes.len() - 1;
                    match min_hops.cmp(&best_hops) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => {
                            let k = self.nodes.len().min(best.nodes.len());
                            self.nodes[..k] <= best.nodes[..k]
                        }
                    }
                }
            },
            (None, Some(floor)) => bound > floor,
            (None, None) => true,
        }
    }

    fn offer(&mut self) {
        let frame = self.frames.last().expect("destination frame");
        let (bottleneck, frame_delta) = (frame.bottleneck.clone(), frame.delta.clone());
        let Some(tp) = self.ratio(&bottleneck, &frame_delta) else {
            return;
        };
        if let Some(floor) = &self.floor {
            if tp <= *floor {
                return;
            }
        }
        if !self.adds_new_direction() {
            return;
        }
        let better = match &self.best {
            None => true,
            Some(best) => {
                tp.cmp(&best.throughput)
                    .then_with(|| best.nodes.len().cmp(&self.nodes.len()))
                    .then_with(|| best.nodes.cmp(&self.nodes))
                    == Ordering::Greater
            }
        };
        if better {
            let path = PathFlow {
                id: self.sol.paths.len() + 1,
                links: self.links.clone(),
                bottleneck: bottleneck.clone(),
            };
            let (_, plans, delta) = schedule_links(&self.sol.schedule, self.g, &self.links, &bottleneck);
            debug_assert_eq!(delta, frame_delta);
            self.best = Some(Best {
                throughput: tp.clone(),
                nodes: self.nodes.clone(),
                candidate: Candidate {
                    path,
                    plans,
                    delta,
                    new_throughput: tp,
                },
            });
        }
    }
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{commit, schedule_path};
    use crate::rational::{int, ratio};

    #[test]
    fn single_edge_candidate() {
        let g = ConnectivityGraph::from_edges(2, [(0, 1, int(11))]).unwrap();
        let sol = Solution::new(NodeId(0), NodeId(1));
        let cand = find_best_augmenting_path(&sol, &g).unwrap();
        assert_eq!(cand.path.hops(), 1);
        assert_eq!(cand.new_throughput, int(11));
    }

    #[test]
    fn prefers_fast_chain_over_slow_chord() {
        let g = ConnectivityGraph::from_edges(3, [(0, 1, int(11)), (1, 2, int(11)), (0, 2, int(2))]).unwrap();
        let sol = Solution::new(NodeId(0), NodeId(2));
        let cand = find_best_augmenting_path(&sol, &g).unwrap();
        assert_eq!(cand.path.nodes(), vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(cand.new_throughput, ratio(11, 2));
    }

    #[test]
    fn returns_non_improving_candidate() {
        let g = ConnectivityGraph::from_edges(3, [(0, 1, int(12)), (1, 2, int(12)), (0, 2, int(1))]).unwrap();
        let mut sol = Solution::new(NodeId(0), NodeId(2));
        let first = find_best_augmenting_path(&sol, &g).unwrap();
        assert_eq!(first.new_throughput, int(6));
        commit(&mut sol, first).unwrap();
        assert!(find_improving_path(&sol, &g).is_none());
        let again = find_best_augmenting_path(&sol, &g).unwrap();
        assert_eq!(again.path.nodes(), vec![NodeId(0), NodeId(2)]);
        assert_eq!(again.new_throughput, ratio(13, 3));
        assert!(!crate::optimizer::accept(&sol, &again));
    }

    #[test]
    fn repeated_route_is_not_a_candidate() {
        let g = ConnectivityGraph::from_edges(3, [(0, 1, int(12)), (1, 2, int(12))]).unwrap();
        let mut sol = Solution::new(NodeId(0), NodeId(2));
        let first = find_best_augmenting_path(&sol, &g).unwrap();
        commit(&mut sol, first).unwrap();
        assert!(find_best_augmenting_path(&sol, &g).is_none());
    }

    #[test]
    fn ties_prefer_fewer_hops_then_lower_ids() {
        // two equal 2-hop routes 0-1-3 and 0-2-3
        let g =
            ConnectivityGraph::from_edges(4, [(0, 2, int(6)), (2, 3, int(6)), (0, 1, int(6)), (1, 3, int(6))]).unwrap();
        let sol = Solution::new(NodeId(0), NodeId(3));
        let cand = find_best_augmenting_path(&sol, &g).unwrap();
        assert_eq!(cand.path.nodes(), vec![NodeId(0), NodeId(1), NodeId(3)]);
        let direct = schedule_path(&sol, &g, &cand.path.links).unwrap();
        assert_eq!(direct.new_throughput, cand.new_throughput);
        assert_eq!(direct.plans, cand.plans);
    }
}
