//! `gridstorm`: simulate, train load-alteration attackers, falsify stealth with
//! false data, validate and compare attack vectors.
//!
//! Exit codes: 0 success, 1 predicate false, 2 input error, 3 no counter-example,
//! 4 internal consistency breach.

mod commands;
mod output;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridstorm::sim::{NoiseMode, SignalBasis};

#[derive(Parser, Debug)]
#[command(
    name = "gridstorm",
    version,
    about = "AGC attack simulation, training and falsification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the grid, optionally under an attack vector.
    Simulate(SimulateArgs),
    /// Train a load-alteration attacker with DDPG.
    TrainLaa(TrainArgs),
    /// Search false data that keeps an LAA schedule stealthy until unsafe.
    Falsify(FalsifyArgs),
    /// Re-simulate an attack vector and check the stealth-until-unsafe predicate.
    Validate(ValidateArgs),
    /// Compare LAA-only, FDIA-only and combined attacks.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    /// Grid configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frequency signal that decides safety.
    #[arg(long, value_enum)]
    signal_basis: Option<BasisArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BasisArg {
    Measured,
    True,
}

impl From<BasisArg> for SignalBasis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Measured => SignalBasis::Measured,
            BasisArg::True => SignalBasis::TrueState,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NoiseArg {
    Off,
    On,
}

impl From<NoiseArg> for NoiseMode {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Off => NoiseMode::Off,
            NoiseArg::On => NoiseMode::On,
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Attack vector file; nominal operation without it.
    #[arg(long)]
    attack: Option<PathBuf>,
    #[arg(long, default_value_t = 800)]
    horizon: usize,
    #[arg(long, value_enum, default_value = "off")]
    noise: NoiseArg,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Training configuration (JSON).
    #[arg(long)]
    train_config: PathBuf,
    /// Exit 1 unless the moving-average reward ends at least where it started.
    #[arg(long)]
    assert_improving: bool,
    /// Moving-average window for the trend check.
    #[arg(long, default_value_t = 10)]
    window: usize,
}

#[derive(Args, Debug)]
pub struct FalsifyArgs {
    #[command(flatten)]
    common: Common,
    /// LAA breaker schedule (schedule or attack file).
    #[arg(long)]
    laa: PathBuf,
    /// Falsification configuration (JSON).
    #[arg(long)]
    falsify_config: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    attack: PathBuf,
    /// Steps to simulate; defaults to the horizon recorded in the file, else `d`.
    #[arg(long)]
    horizon: Option<usize>,
    /// Noisy replays for the success fraction (0 disables).
    #[arg(long, default_value_t = 0)]
    noise_runs: usize,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    attack: PathBuf,
    #[arg(long, default_value_t = 800)]
    horizon: usize,
    #[arg(long)]
    laa_only: bool,
    #[arg(long)]
    fdia_only: bool,
    #[arg(long)]
    combined: bool,
    /// Largest first-unsafe step accepted for the combined attack.
    #[arg(long, default_value_t = 50)]
    max_k_prime: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate::run(a),
        Command::TrainLaa(a) => commands::train::run(a),
        Command::Falsify(a) => commands::falsify::run(a),
        Command::Validate(a) => commands::validate::run(a),
        Command::Compare(a) => commands::compare::run(a),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
