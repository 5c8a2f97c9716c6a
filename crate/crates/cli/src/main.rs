//! `screenalloc` command-line tool.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use screenalloc::data::Regime;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unusable input files (exit 2).
    Input(String),
    /// The solve finished and found no feasible policy (exit 3).
    Infeasible,
    /// Writing outputs failed (exit 1).
    Output(String),
    /// Solver failure on valid input (exit 1).
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Infeasible => 3,
            CliError::Output(_) | CliError::Internal(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "screenalloc",
    version,
    about = "Optimal screening and allocation under a budget"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Screen,
    Noscreen,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen {
        #[arg(long, value_parser = parse_regime)]
        regime: Regime,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of applicants, split evenly between the two groups.
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Atoms per targeted posterior.
        #[arg(long, default_value_t = 101)]
        bins: usize,
    },
    /// Build the instance for the German Credit data set.
    GenGerman {
        /// Path to german.data (whitespace-separated, 21 columns).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 150_000.0)]
        budget: f64,
    },
    /// Solve an instance with or without screening.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Minimum expected utility for group 0. In noscreen mode group 0 is
        /// funded to exactly this level.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Screen)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        /// Boundary-probability grid resolution (alpha step is 1 / steps).
        #[arg(long, default_value_t = 20)]
        alpha_steps: u32,
    },
    /// Trace utility against group-0 utility, with and without screening.
    Frontier {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        alpha_steps: u32,
    },
    /// Monte Carlo evaluation of a policy, next to its exact value.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        /// Policy JSON with `screening` and `allocation`; solve output works.
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse::<Regime>().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            regime,
            seed,
            out,
            n,
            bins,
        } => commands::gen(regime, seed, n, bins, &out),
        Command::GenGerman { data, out, budget } => commands::gen_german(&data, budget, &out),
        Command::Solve {
            instance,
            lambda,
            mode,
            out,
            alpha_steps,
        } => commands::solve(&instance, lambda, mode, alpha_steps, &out),
        Command::Frontier {
            instance,
            lambda_min,
            lambda_max,
            steps,
            out,
            alpha_steps,
        } => commands::frontier(&instance, lambda_min, lambda_max, steps, alpha_steps, &out),
        Command::Simulate {
            instance,
            policy,
            draws,
            seed,
            out,
        } => commands::simulate(&instance, &policy, draws, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) => eprintln!("error: {m}"),
                CliError::Output(m) => eprintln!("error writing output: {m}"),
                CliError::Internal(m) => eprintln!("solver error: {m}"),
                CliError::Infeasible => eprintln!("infeasible: no policy meets the budget and constraints"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
