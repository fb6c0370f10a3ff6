use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod config;
mod error;
mod output;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("CC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(anyhow::anyhow!("CC_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(CliError::input)
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Centrality(a) => commands::centrality(&cli.global, a),
        Command::Curriculum(a) => commands::curriculum(&cli.global, a),
        Command::Percolation(a) => commands::percolation(&cli.global, a),
        Command::Simulate(a) => commands::simulate(&cli.global, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
