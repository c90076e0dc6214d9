mod args;
mod cmd;
mod error;
mod output;
mod range;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, Status, EXIT_FAILURE};

fn run(cli: &Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Analyze(a) => cmd::analyze(a),
        Command::Bounds(a) => cmd::bounds(a),
        Command::GapScan(a) => cmd::gap_scan(a),
        Command::Simulate(a) => cmd::simulate(a),
        Command::PhySlope(a) => cmd::phy_slope(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed(reason)) => {
            eprintln!("check failed: {reason}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
