mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Common, GalleryParams, SweepKind};

/// Sharp Poincaré–Sobolev constants on Steiner symmetric domains.
///
/// Exit codes: 0 success, 2 configuration or feasibility error, 3 solver
/// non-convergence, 4 unresolved tail.
#[derive(Parser)]
#[command(name = "steiner-ps", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Concurrent sweep members.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed of the random initial perturbation (see solver.perturbation).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override of solver.tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem: result.json, field.csv, energy.csv.
    Solve,
    /// Run the sweep described by the [sweep] table of the config.
    Sweep {
        #[arg(long, value_enum)]
        kind: Option<SweepKind>,
    },
    /// Report on gallery domains: Steiner verdict, inradius, behavior at
    /// infinity, then a solve with decay summary or a drift test.
    Gallery {
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        #[arg(long, default_value_t = 0.125)]
        spacing: f64,
        /// Truncation half extent for unbounded domains.
        #[arg(long = "half-extent", default_value_t = 16.0)]
        half_extent: f64,
    },
    /// Tail analysis of a solve output (directory or its result.json).
    Decay { result: PathBuf },
    /// Full Steiner symmetrization of a field file.
    Symmetrize {
        field: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Potential exponents for the rearrangement report.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
        alphas: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = Common {
        config: cli.config,
        out: cli.out,
        jobs: cli.jobs.max(1),
        seed: cli.seed,
        tolerance: cli.tolerance,
    };
    let result = match &cli.command {
        Command::Solve => commands::solve(&common),
        Command::Sweep { kind } => commands::sweep(&common, *kind),
        Command::Gallery {
            name,
            all,
            dim,
            p,
            q,
            spacing,
            half_extent,
        } => {
            let gp = GalleryParams {
                dim: *dim,
                p: *p,
                q: *q,
                spacing: *spacing,
                half_extent: *half_extent,
            };
            commands::gallery_cmd(&common, name.as_deref(), *all, &gp)
        }
        Command::Decay { result } => commands::decay(&common, result),
        Command::Symmetrize { field, p, alphas } => {
            commands::symmetrize(&common, field, *p, alphas)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
