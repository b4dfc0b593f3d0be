use std::collections::BTreeSet;

use num_traits::Zero;

use super::{PathFlow, Solution};
use crate::error::{Error, Result};
use crate::graph::{ConnectivityGraph, NodeId};
use crate::rational::{format_decimal, parse_rational, Rational};
use crate::schedule::{parse_slot_line, Schedule};

impl Solution {
    /// Paths, then the schedule dump, then `throughput=<p/q> (<x.xxx> Mbps)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.paths {
            out.push_str(&format!("{p}\n"));
        }
        out.push_str(&self.schedule.dump());
        out.push_str(&format!(
            "throughput={} ({} Mbps)\n",
            self.throughput,
            format_decimal(&self.throughput, 3)
        ));
        out
    }

    /// Reads a dump back for re-validation. Reported values (bottlenecks,
    /// throughput) are kept as written so that a validator can check them.
    pub fn parse_dump(text: &str, g: &ConnectivityGraph) -> Result<Solution> {
        let mut paths = Vec::new();
        let mut slots = Vec::new();
        let mut throughput = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line.starts_with("p(") {
                paths.push(parse_path_line(line, g)?);
            } else if line.starts_with("slot ") {
                slots.push(parse_slot_line(line)?);
            } else if let Some(rest) = line.strip_prefix("throughput=") {
                let value = rest.split_whitespace().next().unwrap_or("");
                throughput =
                    Some(parse_rational(value).ok_or_else(|| Error::Parse(format!("bad throughput line: {line}")))?);
            } else {
                return Err(Error::Parse(format!("unrecognized line: {line}")));
            }
        }
        let first = paths
            .first()
            .ok_or_else(|| Error::Parse("dump lists no paths".into()))?;
        let (source, destination) = (first.source(), first.destination());
        let deleted: BTreeSet<(NodeId, NodeId)> = paths
            .iter()
            .flat_map(|p: &PathFlow| p.links.iter().map(|l| (l.to, l.from)))
            .collect();
        let total_flow = paths.iter().fold(Rational::zero(), |acc, p| acc + &p.bottleneck);
        Ok(Solution {
            source,
            destination,
            paths,
            schedule: Schedule::from_slots(slots)?,
            deleted_routing_links: deleted,
            total_flow,
            throughput: throughput.ok_or_else(|| Error::Parse("missing throughput line".into()))?,
        })
    }
}

fn parse_path_line(line: &str, g: &ConnectivityGraph) -> Result<PathFlow> {
    let bad = || Error::Parse(format!("bad path line: {line}"));
    let rest = line.strip_prefix("p(").ok_or_else(bad)?;
    let (id, rest) = rest.split_once("):").ok_or_else(bad)?;
    let id: usize = id.parse().map_err(|_| bad())?;
    let (route, bottleneck) = rest.trim().split_once(" bottleneck=").ok_or_else(bad)?;
    let nodes = route
        .split("->")
        .map(|t| t.trim().parse::<usize>().map(NodeId).map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    let mut path = PathFlow::from_nodes(id, g, &nodes).map_err(|e| Error::Parse(format!("{line}: {e}")))?;
    path.bottleneck = parse_rational(bottleneck).ok_or_else(bad)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::solve_multipath;
    use crate::rational::int;

    #[test]
    fn dump_format_and_round_trip() {
        let g = ConnectivityGraph::from_edges(2, [(0, 1, int(11))]).unwrap();
        let sol = solve_multipath(&g, NodeId(0), NodeId(1)).unwrap();
        let text = sol.dump();
        assert_eq!(
            text,
            "p(1): 0->1 bottleneck=11\nslot 1 1/1 : 0->1@11\nthroughput=11 (11.000 Mbps)\n"
        );
        let back = Solution::parse_dump(&text, &g).unwrap();
        assert_eq!(back.paths, sol.paths);
        assert_eq!(back.schedule.slots(), sol.schedule.slots());
        assert_eq!(back.throughput, sol.throughput);
        assert_eq!(back.deleted_routing_links, sol.deleted_routing_links);
    }

    #[test]
    fn rejects_garbage() {
        let g = ConnectivityGraph::from_edges(2, [(0, 1, int(11))]).unwrap();
        assert!(Solution::parse_dump("hello", &g).is_err());
        assert!(Solution::parse_dump("p(1): 0->2 bottleneck=11\nthroughput=1", &g).is_err());
        assert!(Solution::parse_dump("p(1): 0->1 bottleneck=11\n", &g).is_err());
    }
}
