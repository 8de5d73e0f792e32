//! `martlab`: exact marginals, martingale checks, comparisons and Monte
//! Carlo reports from the command line.
//!
//! Exit codes: 0 success, 1 a verification or comparison failed, 2 bad
//! configuration.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::SimulateOptions;
use crate::config::RunArgs;
use crate::error::{config_err, CliResult};

#[derive(Debug, Parser)]
#[command(name = "martlab", version, about = "Martingales whose marginals do not decide convergence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the exact marginal laws mu[0..=horizon].
    Marginals {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare two chains' exact marginals; exit 1 unless all are equal.
    Compare {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check the martingale property and structural invariants exactly.
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample paths and write a Monte Carlo report.
    Simulate {
        /// Times for empirical marginals, e.g. 8,16,32.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<u32>>,
        /// Absorption window START,END.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        window: Option<Vec<u32>>,
        /// Range FIRST,LAST of times for alternation rates.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        alternation: Option<Vec<u32>>,
        /// Number of events K for the excursion tail and count checks.
        #[arg(long)]
        events: Option<u64>,
        /// Exit 1 if any row is outside its tolerance.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate E|M_n|^p and E[|M_n|; |M_n| > y] from the exact marginals.
    Probe {
        #[arg(long, default_value_t = 1)]
        p: u32,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        y: Vec<u128>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the merged configuration as TOML after validating it.
    Config {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build the certified alternation schedule t_1 < ... < t_K.
    Schedule {
        #[command(flatten)]
        run: RunArgs,
    },
}

fn pair(v: Option<Vec<u32>>, flag: &str) -> CliResult<Option<(u32, u32)>> {
    match v.as_deref() {
        None => Ok(None),
        Some([a, b]) if a <= b => Ok(Some((*a, *b))),
        Some(_) => Err(config_err(format!("--{flag} expects START,END with START <= END"))),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Marginals { run } => commands::marginals(&run.resolve()?),
        Command::Compare { left, right, run } => commands::compare(&run.resolve()?, &left, &right),
        Command::Verify { run } => commands::verify(&run.resolve()?),
        Command::Simulate { times, window, alternation, events, check, run } => {
            let opts = SimulateOptions {
                times,
                window: pair(window, "window")?,
                alternation: pair(alternation, "alternation")?,
                events,
                check,
            };
            commands::simulate(&run.resolve()?, &opts)
        }
        Command::Probe { p, y, run } => commands::probe(&run.resolve()?, p, &y),
        Command::Schedule { run } => commands::schedule(&run.resolve()?),
        Command::Config { run } => {
            run.resolve()?;
            print!("{}", run.merged()?.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("martlab: {e}");
            e.exit_code()
        }
    }
}
