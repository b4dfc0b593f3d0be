//! Seeded random unit-disk topologies.
//!
//! The stream is fully portable: every attempt seeds xoshiro256** through
//! splitmix64 (`seed_from_u64`), coordinates use the top 53 bits of
//! `next_u64` scaled by 2^-53, and capacity levels use rejection sampling on
//! `next_u64` against the largest multiple of the level count. Attempt 0 uses
//! the `TopologySpec` seed as is; attempt `a > 0` uses the `a`-th output of a
//! splitmix64 stream seeded with that seed.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};
use serde::{Deserialize, Serialize};

use super::{ConnectivityGraph, NodeId};
use crate::error::{Error, Result};
use crate::rational::int;

const MAX_ATTEMPTS: u64 = 100;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub node_count: usize,
    pub target_directed_link_count: usize,
    pub cap_min: u64,
    pub cap_max: u64,
    pub cap_step: u64,
    pub seed: u64,
    /// When false the first attempt is returned even if it is disconnected.
    #[serde(default = "default_true")]
    pub require_connected: bool,
}

fn default_true() -> bool {
    true
}

impl TopologySpec {
    /// 100 nodes, 320 directed links, capacities 5..=15 Mbps in 1 Mbps steps.
    ///
    /// A unit-disk graph this sparse is essentially never connected (it takes
    /// well over 400 directed links), so connectivity is not required here.
    pub fn mesh_100(seed: u64) -> Self {
        TopologySpec {
            node_count: 100,
            target_directed_link_count: 320,
            cap_min: 5,
            cap_max: 15,
            cap_step: 1,
            seed,
            require_connected: false,
        }
    }

    /// Connected instance with `links` directed links and 5..=15 Mbps capacities.
    pub fn connected(node_count: usize, links: usize, seed: u64) -> Self {
        TopologySpec {
            node_count,
            target_directed_link_count: links,
            cap_min: 5,
            cap_max: 15,
            cap_step: 1,
            seed,
            require_connected: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invariant(m));
        if self.node_count < 2 {
            return bad(format!("node_count must be at least 2, got {}", self.node_count));
        }
        if self.cap_min == 0 || self.cap_min > self.cap_max {
            return bad(format!("invalid capacity range {}..{}", self.cap_min, self.cap_max));
        }
        if self.cap_step == 0 || !(self.cap_max - self.cap_min).is_multiple_of(self.cap_step) {
            return bad(format!(
                "cap_step {} must divide {}",
                self.cap_step,
                self.cap_max - self.cap_min
            ));
        }
        let max_links = self.node_count * (self.node_count - 1);
        if self.target_directed_link_count < 2 || self.target_directed_link_count > max_links {
            return bad(format!(
                "target link count {} outside 2..={max_links}",
                self.target_directed_link_count
            ));
        }
        Ok(())
    }

    fn levels(&self) -> u64 {
        (self.cap_max - self.cap_min) / self.cap_step + 1
    }
}

pub(crate) fn unit_f64(rng: &mut impl Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn uniform_below(rng: &mut impl Rng, n: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % n + 1) % n;
    loop {
        let x = rng.next_u64();
        if x <= zone {
            return x % n;
        }
    }
}

/// Deterministic unit-disk topology for `spec`.
///
/// Nodes are uniform in the unit square. Pairs are admitted in order of
/// increasing distance (ties by index), which is the same as sweeping the
/// radius upward; the radius stops at the target edge count, or later if the
/// graph only becomes connected further on but still within 5% of target.
pub fn generate_random_topology(spec: &TopologySpec) -> Result<ConnectivityGraph> {
    spec.validate()?;
    let n = spec.node_count;
    let pair_total = n * (n - 1) / 2;
    let target = spec.target_directed_link_count as f64;
    let k_target = ((target / 2.0).round() as usize).clamp(1, pair_total);
    let k_lo = ((0.95 * target / 2.0).ceil() as usize).max(1);
    let k_hi = ((1.05 * target / 2.0).floor() as usize).min(pair_total);
    if k_lo > k_hi || k_target < k_lo || k_target > k_hi {
        return Err(Error::Generation(format!(
            "no edge count lands within 5% of {} directed links",
            spec.target_directed_link_count
        )));
    }

    let mut seeds = SplitMix64::seed_from_u64(spec.seed);
    for attempt in 0..MAX_ATTEMPTS {
        let attempt_seed = if attempt == 0 { spec.seed } else { seeds.next_u64() };
        let mut rng = Xoshiro256StarStar::seed_from_u64(attempt_seed);
        let points: Vec<(f64, f64)> = (0..n).map(|_| (unit_f64(&mut rng), unit_f64(&mut rng))).collect();

        let mut pairs = Vec::with_capacity(pair_total);
        for i in 0..n {
            for j in i + 1..n {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                pairs.push((dx * dx + dy * dy, i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let k = if spec.require_connected {
            match connectivity_prefix(n, &pairs[..k_hi]) {
                Some(connected_at) => k_target.max(connected_at),
                None => continue,
            }
        } else {
            k_target
        };

        let mut chosen: Vec<(usize, usize)> = pairs[..k].iter().map(|&(_, i, j)| (i, j)).collect();
        chosen.sort_unstable();
        let mut g = ConnectivityGraph::new(n);
        for (i, p) in points.iter().enumerate() {
            g.set_coords(NodeId(i), p.0, p.1)?;
        }
        let levels = spec.levels();
        for (i, j) in chosen {
            let cap = spec.cap_min + spec.cap_step * uniform_below(&mut rng, levels);
            g.add_edge(NodeId(i), NodeId(j), int(cap as i64))?;
        }
        return Ok(g);
    }
    Err(Error::Generation(format!(
        "no connected instance within 5% of {} directed links after {MAX_ATTEMPTS} attempts",
        spec.target_directed_link_count
    )))
}

/// Smallest prefix length of `pairs` that connects all `n` nodes.
fn connectivity_prefix(n: usize, pairs: &[(f64, usize, usize)]) -> Option<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for (idx, &(_, i, j)) in pairs.iter().enumerate() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            components -= 1;
            if components == 1 {
                return Some(idx + 1);
            }
        }
    }
    (components == 1).then_some(0)
}
