//! `asg`: derives part relations from an assembled product, searches
//! assembly sequences and checks the result.
//!
//! Exit codes: 0 success, 2 invalid input, 3 the optimiser found no
//! feasible sequence, 4 internal error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asg_core::verify::DEFAULT_MAX_ETA;

#[derive(Debug, Parser)]
#[command(name = "asg", version, about = "Assembly sequence generation from part meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Voxelise a manifest's parts and write the relation matrix bundle.
    Extract {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Voxel edge length in mm (default: longest product edge / 64).
        #[arg(long)]
        resolution: Option<f64>,
        /// Seed for the rotation-test pivot choice.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the genetic algorithm on a bundle.
    Optimize(commands::OptimizeArgs),
    /// Check a sequence against its reorder neighbourhood and, for small
    /// products, the exact Pareto front.
    Verify {
        bundle: PathBuf,
        sequence: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Largest part count for exhaustive enumeration.
        #[arg(long, default_value_t = DEFAULT_MAX_ETA)]
        exhaustive_max: usize,
    },
    /// Plot and summarise an optimisation output directory.
    Report {
        run_dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a built-in fixture (STL files and manifest) or all of them.
    Fixture {
        /// Fixture name, or `all`.
        name: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Extract {
            manifest,
            output,
            resolution,
            seed,
        } => commands::extract(&manifest, &output, resolution, seed),
        Command::Optimize(args) => commands::optimize(&args),
        Command::Verify {
            bundle,
            sequence,
            output,
            exhaustive_max,
        } => commands::verify(&bundle, &sequence, &output, exhaustive_max),
        Command::Report { run_dir, output } => commands::report(&run_dir, &output),
        Command::Fixture { name, output } => commands::fixture(&name, &output),
    };
    match outcome {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
