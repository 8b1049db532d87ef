//! `kpplab`: simulations, geometry queries, front profiles, diagnostics and
//! scenario verdicts from the command line.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "kpplab", version, about = "Fisher-KPP reaction-diffusion laboratory")]
struct Cli {
    /// Force the sequential reference mode (one thread, no split updates).
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the solver from a JSON config and write KPPG snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Queries on a set descriptor.
    #[command(subcommand)]
    Geometry(commands::geometry::GeometryCmd),
    /// Traveling fronts and supersolutions.
    #[command(subcommand)]
    Fronts(commands::fronts::FrontsCmd),
    /// Diagnostics over a directory of snapshots.
    Diagnose(commands::diagnose::DiagnoseArgs),
    /// Built-in and user scenarios.
    #[command(subcommand)]
    Scenario(commands::scenario::ScenarioCmd),
}

/// How a successful invocation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Ran to completion, but at least one verdict is FAIL.
    Fail,
}

/// Execution settings shared by all subcommands.
#[derive(Debug, Clone, Copy)]
pub struct Exec {
    pub parallel: bool,
}

fn configure_threads(sequential: bool) -> anyhow::Result<()> {
    let cap = match std::env::var("KPPLAB_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| anyhow::anyhow!("KPPLAB_THREADS must be a positive integer, got {v:?}"))?),
        Err(_) => None,
    };
    let threads = if sequential { Some(1) } else { cap.filter(|&n| n > 0) };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    configure_threads(cli.sequential)?;
    let exec = Exec { parallel: !cli.sequential && rayon::current_num_threads() > 1 };
    match cli.command {
        Command::Simulate { config, out } => commands::simulate::run(&config, &out, exec),
        Command::Geometry(cmd) => commands::geometry::run(cmd),
        Command::Fronts(cmd) => commands::fronts::run(cmd),
        Command::Diagnose(args) => commands::diagnose::run(args),
        Command::Scenario(cmd) => commands::scenario::run(cmd, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
