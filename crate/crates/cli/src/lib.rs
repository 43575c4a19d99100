//! Command-line front end for quadratic stochastic operators generated by
//! product measures on graphs.

pub mod commands;
pub mod error;
pub mod file;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};

use commands::{RunOptions, Start, TournamentOptions};
use verify::VerifyOptions;

#[derive(Debug, Parser)]
#[command(
    name = "qso",
    version,
    about = "Quadratic stochastic operators on graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file (JSON).
    pub file: PathBuf,
    /// Named measure preset from the model file.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model and summarize its structure.
    Build {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the heredity tensor as nested JSON arrays.
        #[arg(long, value_name = "PATH")]
        export: Option<PathBuf>,
    },
    /// Iterate the operator and classify the limit.
    Iterate {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated starting point.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              conflicts_with_all = ["uniform", "random"])]
        x0: Option<Vec<f64>>,
        /// Start at the barycenter (default).
        #[arg(long, conflicts_with = "random")]
        uniform: bool,
        /// Start at a random interior point drawn with `--seed`.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Record every n-th step (default spreads records over the run).
        #[arg(long)]
        stride: Option<usize>,
        /// Write the recorded trajectory as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        membership_tol: f64,
    },
    /// Print the per-component Volterra matrices and check commutation.
    Reduce {
        #[command(flatten)]
        model: ModelArgs,
        /// Random points for the commutation check.
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Predict which coordinates survive from the dominance tournament.
    Tournament {
        #[command(flatten)]
        model: ModelArgs,
        /// Component to analyse (1-based); all when omitted.
        #[arg(long)]
        component: Option<usize>,
        /// Run a trajectory and fit the decay of every coordinate.
        #[arg(long)]
        confirm: bool,
        #[arg(long, default_value_t = 5_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the structural properties on random models.
    Verify {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_vertices: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Executes `cli`, writing the report to `out`.
pub fn run(cli: Cli, cap: usize, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Build { model, export } => commands::build(
            &model.file,
            model.preset.as_deref(),
            export.as_deref(),
            cap,
            out,
        ),
        Command::Iterate {
            model,
            x0,
            uniform: _,
            random,
            seed,
            steps,
            tol,
            stride,
            csv,
            membership_tol,
        } => {
            let start = match (x0, random) {
                (Some(x), _) => Start::Explicit(x),
                (None, true) => Start::Random(seed),
                (None, false) => Start::Uniform,
            };
            let options = RunOptions {
                start,
                steps,
                tol,
                stride,
                csv,
                membership_tol,
            };
            commands::iterate(&model.file, model.preset.as_deref(), &options, cap, out)
        }
        Command::Reduce {
            model,
            points,
            seed,
        } => commands::reduce(&model.file, model.preset.as_deref(), points, seed, cap, out),
        Command::Tournament {
            model,
            component,
            confirm,
            steps,
            seed,
        } => {
            let options = TournamentOptions {
                component,
                confirm,
                steps,
                seed,
            };
            commands::tournament(&model.file, model.preset.as_deref(), &options, cap, out)
        }
        Command::Verify {
            trials,
            seed,
            max_vertices,
            inject_fault,
        } => {
            let options = VerifyOptions {
                trials,
                seed,
                max_vertices,
                inject_fault,
            };
            verify::verify(&options, cap, out)
        }
    }
}
