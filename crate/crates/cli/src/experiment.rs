use std::fmt::Write as _;
use std::time::Instant;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};
use rayon::prelude::*;

use meshflow::graph::{generate_random_topology, min_hop_distance};
use meshflow::mtm::mtm_path_with;
use meshflow::rational::int;
use meshflow::{solve_multipath, BaselineScheduling, ConnectivityGraph, NodeId, Rational};

use crate::commands::{fmt3, write_output, CmdResult, Failure};
use crate::ExperimentArgs;

pub const MAX_PAIR_DRAWS: usize = 10_000;

pub const HEADER: &str = "hop,trial,seed,multipath_mbps,mtm_mbps,ratio,paths,slots,runtime_ms";

struct Row {
    hop: usize,
    trial: usize,
    seed: u64,
    multipath: Rational,
    mtm: Rational,
    paths: usize,
    slots: usize,
    runtime_ms: f64,
}

impl Row {
    fn ratio(&self) -> Rational {
        &self.multipath / &self.mtm
    }
}

fn check(args: &ExperimentArgs) -> CmdResult {
    if args.trials == 0 {
        return Err(Failure::Usage("trials must be at least 1".into()));
    }
    let n = args.instance.nodes;
    if args.hop_min == 0 || args.hop_min > args.hop_max || args.hop_max + 1 > n {
        return Err(Failure::Usage(format!(
            "hop range {}..={} must lie within 1..={}",
            args.hop_min,
            args.hop_max,
            n.saturating_sub(1)
        )));
    }
    args.instance.spec(args.require_connected).validate()?;
    Ok(())
}

/// Sub-seed for job `index`: that many steps into a splitmix64 stream seeded
/// with the master seed.
pub fn sub_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut stream = SplitMix64::seed_from_u64(master);
    (0..count).map(|_| stream.next_u64()).collect()
}

fn uniform_below(rng: &mut impl Rng, n: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % n + 1) % n;
    loop {
        let x = rng.next_u64();
        if x <= zone {
            return x % n;
        }
    }
}

/// Uniform ordered pair at exactly `hop` hops, by rejection sampling.
fn pick_pair(g: &ConnectivityGraph, hop: usize, seed: u64) -> Option<(NodeId, NodeId)> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let n = g.node_count() as u64;
    for _ in 0..MAX_PAIR_DRAWS {
        let s = NodeId(uniform_below(&mut rng, n) as usize);
        let d = NodeId(uniform_below(&mut rng, n) as usize);
        if s != d && min_hop_distance(g, s, d).ok().flatten() == Some(hop) {
            return Some((s, d));
        }
    }
    None
}

fn trial(args: &ExperimentArgs, hop: usize, trial: usize, seed: u64) -> Result<Option<Row>, Failure> {
    let mut spec = args.instance.spec(args.require_connected);
    spec.seed = seed;
    let g = generate_random_topology(&spec)?;
    let Some((s, d)) = pick_pair(&g, hop, seed) else {
        eprintln!("hop {hop} trial {trial}: no pair found in {MAX_PAIR_DRAWS} draws, skipped");
        return Ok(None);
    };
    let started = Instant::now();
    let sol = solve_multipath(&g, s, d)?;
    let runtime_ms = started.elapsed().as_secs_f64() * 1000.0;
    let baseline = if args.no_reuse_baseline {
        BaselineScheduling::NoReuse
    } else {
        BaselineScheduling::SpatialReuse
    };
    let single = mtm_path_with(&g, s, d, baseline)?;
    Ok(Some(Row {
        hop,
        trial,
        seed,
        multipath: sol.throughput,
        mtm: single.throughput,
        paths: sol.paths.len(),
        slots: sol.schedule.len(),
        runtime_ms: if args.no_timing { 0.0 } else { runtime_ms },
    }))
}

fn mean(values: impl Iterator<Item = Rational>, count: usize) -> Rational {
    values.fold(int(0), |acc, v| acc + v) / int(count as i64)
}

pub fn run(args: &ExperimentArgs) -> CmdResult {
    check(args)?;
    let jobs: Vec<(usize, usize)> = (args.hop_min..=args.hop_max)
        .flat_map(|h| (0..args.trials).map(move |t| (h, t)))
        .collect();
    let seeds = sub_seeds(args.instance.seed, jobs.len());
    let rows = jobs
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(&(hop, t), &seed)| trial(args, hop, t, seed))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = String::new();
    csv.push_str(HEADER);
    csv.push('\n');
    for hop in args.hop_min..=args.hop_max {
        let bucket: Vec<&Row> = rows.iter().flatten().filter(|r| r.hop == hop).collect();
        for r in &bucket {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{:.3}",
                r.hop,
                r.trial,
                r.seed,
                fmt3(&r.multipath),
                fmt3(&r.mtm),
                fmt3(&r.ratio()),
                r.paths,
                r.slots,
                r.runtime_ms
            );
        }
        if bucket.is_empty() {
            continue;
        }
        let k = bucket.len();
        let runtime = bucket.iter().map(|r| r.runtime_ms).sum::<f64>() / k as f64;
        let _ = writeln!(
            csv,
            "{hop},mean,,{},{},{},{},{},{:.3}",
            fmt3(&mean(bucket.iter().map(|r| r.multipath.clone()), k)),
            fmt3(&mean(bucket.iter().map(|r| r.mtm.clone()), k)),
            fmt3(&mean(bucket.iter().map(|r| r.ratio()), k)),
            fmt3(&mean(bucket.iter().map(|r| int(r.paths as i64)), k)),
            fmt3(&mean(bucket.iter().map(|r| int(r.slots as i64)), k)),
            runtime
        );
    }
    match &args.out {
        Some(path) => write_output(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
