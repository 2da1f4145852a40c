//! Command-line driver: simulate panels, fit chains, diagnose draws,
//! extract networks and run rolling forecasts.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bnpvar",
    version,
    about = "Sparse Bayesian VAR estimation with network extraction"
)]
struct Cli {
    /// Worker threads for parallel chains and forecast origins.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a stationary VAR(1) panel and its true coefficients.
    Simulate(commands::simulate::SimulateArgs),
    /// Run the Gibbs sampler on a data file and persist the draws.
    Fit(commands::fit::FitArgs),
    /// Convergence diagnostics for a draw directory.
    Diagnose(commands::diagnose::DiagnoseArgs),
    /// Extract weighted networks, statistics and exports from draws.
    Network(commands::network::NetworkArgs),
    /// Rolling one-step forecast evaluation.
    Forecast(commands::forecast::ForecastArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // help/version exit cleanly; anything else is a usage error
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Diagnose(args) => commands::diagnose::run(args),
        Command::Network(args) => commands::network::run(args),
        Command::Forecast(args) => commands::forecast::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_class(&err))
        }
    }
}

// 1 for usage/configuration/data problems, 2 for numerical failures
fn exit_class(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<bnpvar::Error>() {
        Some(bnpvar::Error::Numerical(_)) | Some(bnpvar::Error::NotPositiveDefinite(_)) => 2,
        _ => 1,
    }
}
