use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use dynprice_cli::{cmd_bounds, cmd_chernoff, cmd_run, cmd_validate, parse_pair, RunOverrides};

/// Dynamic pricing with a finite set of candidate demand curves.
#[derive(Parser)]
#[command(name = "dynprice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment and write the regret CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides run.base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides run.workers.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,
        /// Overrides output.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the pull-count caps for the likelihood-ratio policies.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.bounds.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exploration price and Chernoff distance for a model pair.
    Chernoff {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_pair, default_value = "0,1")]
        pair: (usize, usize),
    },
    /// Check that the scenario's arm prices separate every pair of models.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out: csv,
        } => cmd_run(
            &config,
            &RunOverrides {
                seed,
                workers: workers.map(|w| w as usize),
                out: csv,
            },
            &mut out,
        ),
        Command::Bounds { config, out: path } => cmd_bounds(&config, path.as_deref(), &mut out),
        Command::Chernoff { config, pair } => cmd_chernoff(&config, pair, &mut out),
        Command::Validate { config } => cmd_validate(&config, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
