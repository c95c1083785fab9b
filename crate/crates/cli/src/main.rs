//! `dslab`: analysis, simulation and validation of decay-surge processes
//! from a JSON model file.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dslab::sampler::ZeroPolicy;
use dslab::validation::Suite;

/// Bad input rather than a failed computation; exits with code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser)]
#[command(name = "dslab", version, about = "Decay-surge Markov processes: analysis, exact simulation, validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the boundary and regime; tabulate Γ, s, s₁ and π on a grid.
    Analyze(AnalyzeArgs),
    /// Simulate an ensemble of exact paths.
    Simulate(SimulateArgs),
    /// Simulate the embedded jump chain with its jump times.
    Embedded(ChainArgs),
    /// Simulate the embedded chain and extract its upper records.
    Records(ChainArgs),
    /// Probability of entering (0, a] before [b, ∞) from x.
    Exitprob(ExitArgs),
    /// Mean time to enter (0, a] from x; a = 0 gives the mean extinction time.
    Hitmean(HitArgs),
    /// Run an acceptance suite and print a pass/fail table.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ModelArg {
    /// JSON model file.
    model: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "dslab_out")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 1e-3)]
    grid_min: f64,
    #[arg(long, default_value_t = 1e3)]
    grid_max: f64,
    /// Number of geometrically spaced grid points.
    #[arg(long, default_value_t = 121, value_parser = clap::value_parser!(u64).range(2..))]
    grid_points: u64,
}

#[derive(Args, Clone, Copy)]
struct SimArgs {
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_jumps: u64,
    /// What a path does on reaching 0.
    #[arg(long, value_enum, default_value_t = ZeroArg::Reflect)]
    zero_policy: ZeroArg,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum ZeroArg {
    Absorb,
    Reflect,
}

impl From<ZeroArg> for ZeroPolicy {
    fn from(z: ZeroArg) -> Self {
        match z {
            ZeroArg::Absorb => ZeroPolicy::Absorb,
            ZeroArg::Reflect => ZeroPolicy::Reflect,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    paths: u64,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExitArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Also estimate by Monte Carlo with this many paths.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    mc_paths: Option<u64>,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args)]
struct HitArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    a: f64,
    /// Also estimate by Monte Carlo with this many paths.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    mc_paths: Option<u64>,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: Suite,
    /// Override every Monte Carlo sample size; below nominal, statistical
    /// misses are reported as warnings.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    paths: Option<u64>,
    #[arg(long, default_value_t = dslab::validation::DEFAULT_SEED)]
    seed: u64,
    /// Also write the outcomes as JSON into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: dslab::Error| e.to_string())
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("DSLAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| InputError(format!("DSLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    init_threads()?;
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Embedded(a) => commands::embedded(&a),
        Command::Records(a) => commands::records(&a),
        Command::Exitprob(a) => commands::exitprob(&a),
        Command::Hitmean(a) => commands::hitmean(&a),
        Command::Validate(a) => commands::validate(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
