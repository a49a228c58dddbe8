//! `crflab`: scenario-driven runner for the Chern-Ricci flow lab.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure,
//! 64 usage error.

mod commands;
mod failure;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "crflab", version, about = "Chern-Ricci flow numerical lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Output directory (default `runs/<subcommand>-<input hash>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random recipes and sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Chern tensor identity suite on a random torus context.
    VerifyIdentities(commands::VerifyArgs),
    /// Integrate the unnormalized flow of a scenario.
    RunFlow(commands::FlowArgs),
    /// Integrate the normalized flow of a scenario.
    RunNormalized(commands::FlowArgs),
    /// Tabulate the explicit Hopf solution at one time.
    HopfExplicit(commands::HopfExplicitArgs),
    /// Check the explicit Hopf solution and the trace chain.
    HopfVerify(commands::HopfVerifyArgs),
    /// Solve the elliptic Monge-Ampère equation of a scenario.
    SolveMa(commands::SolveArgs),
    /// Maximal existence time and collapse case of a complex surface.
    MaxTime(commands::MaxTimeArgs),
    /// Plot trajectory CSV columns against t as SVG.
    Plot(commands::PlotArgs),
}

fn configure_threads() {
    if let Some(n) = std::env::var("CRFLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::VerifyIdentities(a) => commands::verify_identities(a),
        Command::RunFlow(a) => commands::run_flow(a, false),
        Command::RunNormalized(a) => commands::run_flow(a, true),
        Command::HopfExplicit(a) => commands::hopf_explicit(a),
        Command::HopfVerify(a) => commands::hopf_verify(a),
        Command::SolveMa(a) => commands::solve_ma(a),
        Command::MaxTime(a) => commands::max_time(a),
        Command::Plot(a) => commands::plot(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
