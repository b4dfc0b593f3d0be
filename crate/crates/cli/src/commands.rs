use std::fs;
use std::path::Path;

use meshflow::graph::{generate_random_topology, parse_topology, serialize_topology};
use meshflow::mtm::mtm_path_with;
use meshflow::optimizer::validate;
use meshflow::oracle::{best_over_orderings, check_constraints_literal, OracleBudget};
use meshflow::rational::format_decimal;
use meshflow::{
    solve_multipath, BaselineScheduling, ConnectivityGraph, Error, NodeId, Rational, Solution, TopologySpec,
};

use crate::{GenArgs, InstanceArgs, PairArgs, SolveArgs, VerifyArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    NoPath(String),
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::NoPath(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::NoPath(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoPath(..) => Failure::NoPath(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn fmt3(x: &Rational) -> String {
    format_decimal(x, 3)
}

impl InstanceArgs {
    pub fn spec(&self, require_connected: bool) -> TopologySpec {
        TopologySpec {
            node_count: self.nodes,
            target_directed_link_count: self.links,
            cap_min: self.cap_min,
            cap_max: self.cap_max,
            cap_step: self.cap_step,
            seed: self.seed,
            require_connected,
        }
    }
}

impl PairArgs {
    fn baseline(&self) -> BaselineScheduling {
        if self.no_reuse_baseline {
            BaselineScheduling::NoReuse
        } else {
            BaselineScheduling::SpatialReuse
        }
    }
}

pub fn load_topology(path: &Path) -> Result<ConnectivityGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_topology(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn write_output(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn gen(args: &GenArgs) -> CmdResult {
    let spec = args.instance.spec(!args.allow_disconnected);
    spec.validate()?;
    let g = generate_random_topology(&spec)?;
    write_output(&args.out, &serialize_topology(&g)?)?;
    println!("nodes={} links={}", g.node_count(), g.link_count());
    Ok(())
}

pub fn solve(args: &SolveArgs) -> CmdResult {
    let p = &args.pair;
    let g = load_topology(&p.topology)?;
    let (s, d) = (NodeId(p.source), NodeId(p.destination));
    if args.single_path {
        let r = mtm_path_with(&g, s, d, p.baseline())?;
        println!("{}", r.path);
        println!("medium_time={}", r.medium_time_per_bit);
        if args.dump_schedule {
            let sol = Solution::new(s, d);
            let cand = meshflow::optimizer::schedule_path(&sol, &g, &r.path.links)?;
            let mut sched = sol.schedule;
            for plan in &cand.plans {
                sched.apply_plan(plan)?;
            }
            print!("{}", sched.dump());
        }
        println!("throughput={} ({} Mbps)", r.throughput, fmt3(&r.throughput));
        return Ok(());
    }
    let sol = solve_multipath(&g, s, d)?;
    if args.dump_schedule {
        print!("{}", sol.dump());
    } else {
        for path in &sol.paths {
            println!("{path}");
        }
        println!("throughput={} ({} Mbps)", sol.throughput, fmt3(&sol.throughput));
    }
    Ok(())
}

pub fn compare(args: &PairArgs) -> CmdResult {
    let g = load_topology(&args.topology)?;
    let (s, d) = (NodeId(args.source), NodeId(args.destination));
    let multi = solve_multipath(&g, s, d)?;
    let single = mtm_path_with(&g, s, d, args.baseline())?;
    let ratio = &multi.throughput / &single.throughput;
    println!(
        "multipath={} mtm={} ratio={}",
        fmt3(&multi.throughput),
        fmt3(&single.throughput),
        fmt3(&ratio)
    );
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let g = load_topology(&args.topology)?;
    let (s, d) = (NodeId(args.source), NodeId(args.destination));
    let sol = match &args.solution {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let sol = Solution::parse_dump(&text, &g)
                .map_err(|e| Failure::Verification(format!("unreadable solution: {e}")))?;
            if (sol.source, sol.destination) != (s, d) {
                return Err(Failure::Verification(format!(
                    "solution routes {}->{}, expected {s}->{d}",
                    sol.source, sol.destination
                )));
            }
            sol
        }
        None => solve_multipath(&g, s, d)?,
    };

    let main = validate(&sol, &g);
    let literal = check_constraints_literal(&sol, &g);
    for v in &main {
        println!("validate: {v}");
    }
    for v in &literal {
        println!("literal: {v}");
    }
    println!(
        "throughput={} ({} Mbps) validate={} literal={}",
        sol.throughput,
        fmt3(&sol.throughput),
        main.len(),
        literal.len()
    );
    let mut failed = !main.is_empty() || !literal.is_empty();

    if args.oracle {
        let budget = OracleBudget {
            max_nodes: args.oracle_max_nodes,
            max_paths_considered: args.oracle_max_paths,
            ..OracleBudget::default()
        };
        match best_over_orderings(&g, s, d, &budget) {
            Ok(best) => {
                println!("oracle={} ({} Mbps)", best, fmt3(&best));
                if sol.throughput > best {
                    println!("oracle: greedy exceeds the oracle");
                    failed = true;
                }
            }
            Err(e @ Error::BudgetExceeded(_)) => println!("oracle: skipped, {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    if failed {
        return Err(Failure::Verification("verification failed".into()));
    }
    println!("ok");
    Ok(())
}
