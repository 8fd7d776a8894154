//! `pmelab`: batch experiment runner for the porous-medium laboratory.

mod config;
mod expr;
mod run;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pmelab", about = "porous medium equation laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config's choice)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized verification draws
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configured scenario and analyze it at the configured anchors
    Run {
        /// JSON experiment configuration
        config: PathBuf,
    },
    /// Run a randomized verification suite and write its report
    Verify {
        #[arg(value_enum)]
        suite: suites::Suite,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => {
            let loaded = match config::load_config(config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let out = cli.out.clone().unwrap_or_else(|| loaded.out.clone());
            let seed = cli.seed.or(loaded.seed).unwrap_or(42);
            run::run(&loaded, &out, seed, cli.quiet).map(|o| o.all_passed)
        }
        Command::Verify { suite } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let seed = cli.seed.unwrap_or(42);
            suites::run(*suite, seed, &out, cli.quiet)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => fail(e),
    }
}

fn fail(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::FAILURE
}
