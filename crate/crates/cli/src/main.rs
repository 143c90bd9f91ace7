//! `amr-sched`: generate instances, run the solvers, compare them and check
//! plans by simulation.
//!
//! Exit codes: 0 success, 1 usage error, 2 infeasible input or parse error.

mod commands;

use amr_core::tabu::{DecrementMode, ScanMode};
use amr_core::{Algorithm, Period};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "amr-sched", version, about = "Stochastic multi-trip routing for hospital delivery robots")]
struct Cli {
    /// Worker threads for concurrent runs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write six synthetic Solomon-format base files (C108 ... RC202).
    SynthSolomon {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Extend a Solomon file into a hospital instance named <period>-<base>-<n>.
    Generate(GenerateArgs),
    /// Run one solver several times on one instance.
    Solve(SolveArgs),
    /// Run several solvers on several instances and tabulate gaps against I-TS.
    Compare(CompareArgs),
    /// Monte Carlo check of a plan against its analytic schedule.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Solomon file, or with --sweep a directory holding <BASE>.txt files.
    #[arg(long)]
    solomon: PathBuf,
    #[arg(long, value_parser = parse_period, default_value = "P1")]
    period: Period,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Seed for request floors.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seconds per Solomon time unit.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    /// Generate every base × period × size (20, 50, 100) combination.
    #[arg(long)]
    sweep: bool,
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Base seed; run k uses seed + k.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 40)]
    tenure: u32,
    #[arg(long, default_value_t = 1.0)]
    delta1: f64,
    #[arg(long, default_value_t = 0.2)]
    delta2: f64,
    /// full, sampled or sampled:<k>.
    #[arg(long, value_parser = parse_scan, default_value = "full")]
    scan: ScanMode,
    #[arg(long, value_parser = parse_decrement, default_value = "verbatim")]
    decrement: DecrementMode,
    /// Directory for per-run best-so-far curves (CSV).
    #[arg(long)]
    curve_out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = parse_algorithm, default_value = "its")]
    algorithm: Algorithm,
    #[command(flatten)]
    search: SearchArgs,
    /// Also simulate the best plan with this many samples.
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Output directory for the results document and tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance files or directories of them; repeatable.
    #[arg(long, required = true)]
    instance: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "its,ts,vns,greedy")]
    algorithms: Vec<Algorithm>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Plan file, or a results document whose best run is simulated.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest accepted analytic-vs-sampled gap.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_period(s: &str) -> Result<Period, String> {
    s.parse().map_err(|e: amr_core::Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: amr_core::Error| e.to_string())
}

fn parse_scan(s: &str) -> Result<ScanMode, String> {
    match s.split_once(':') {
        None if s == "full" => Ok(ScanMode::Full),
        None if s == "sampled" => Ok(ScanMode::Sampled(commands::DEFAULT_SAMPLE)),
        Some(("sampled", k)) => match k.parse() {
            Ok(k) if k > 0 => Ok(ScanMode::Sampled(k)),
            _ => Err(format!("bad sample size {k:?}")),
        },
        _ => Err(format!("unknown scan mode {s:?} (full, sampled, sampled:<k>)")),
    }
}

fn parse_decrement(s: &str) -> Result<DecrementMode, String> {
    match s {
        "verbatim" => Ok(DecrementMode::Verbatim),
        "uniform" => Ok(DecrementMode::Uniform),
        _ => Err(format!("unknown decrement mode {s:?} (verbatim, uniform)")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::SynthSolomon { out, seed } => commands::synth_solomon(&out, seed),
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Simulate(a) => commands::simulate(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
