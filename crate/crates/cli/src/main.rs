mod commands;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "meshflow",
    version,
    about = "Multipath routing throughput for multirate wireless mesh networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random unit-disk topology as JSON.
    Gen(GenArgs),
    /// Solve one source/destination pair.
    Solve(SolveArgs),
    /// Compare multipath against the single-path baseline.
    Compare(PairArgs),
    /// Sweep throughput over source/destination hop distance and write CSV.
    Experiment(ExperimentArgs),
    /// Re-check a solution with the validators and, optionally, the oracle.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    /// Target number of directed links.
    #[arg(long, default_value_t = 320)]
    links: usize,
    #[arg(long, default_value_t = 5)]
    cap_min: u64,
    #[arg(long, default_value_t = 15)]
    cap_max: u64,
    #[arg(long, default_value_t = 1)]
    cap_step: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Keep the first layout even when it is not connected.
    #[arg(long)]
    allow_disconnected: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    topology: PathBuf,
    source: usize,
    destination: usize,
    /// Schedule the baseline path without spatial reuse.
    #[arg(long)]
    no_reuse_baseline: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Report the medium-time single path instead of the multipath solution.
    #[arg(long)]
    single_path: bool,
    /// Include the slot table.
    #[arg(long)]
    dump_schedule: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    hop_min: usize,
    #[arg(long, default_value_t = 6)]
    hop_max: usize,
    /// Require every generated layout to be connected.
    #[arg(long)]
    require_connected: bool,
    #[arg(long)]
    no_reuse_baseline: bool,
    /// Write 0.000 in the runtime column so output is byte-stable.
    #[arg(long)]
    no_timing: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    topology: PathBuf,
    source: usize,
    destination: usize,
    /// Check a solution dump instead of solving.
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Also compare against the exhaustive ordering oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 12)]
    oracle_max_nodes: usize,
    #[arg(long, default_value_t = 4)]
    oracle_max_paths: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Experiment(a) => experiment::run(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
