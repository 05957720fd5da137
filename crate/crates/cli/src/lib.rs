//! `kws` command-line front end.
//!
//! Subcommands map onto the library pipeline:
//!
//! ```text
//! prepare             dataset dirs + noise dir  -> manifest.jsonl
//! train               run config + manifest     -> metrics.jsonl, best.ckpt, resolved-config.json
//! eval                checkpoint + manifest     -> accuracy, confusion.csv
//! infer               checkpoint + wav          -> ranked labels
//! sweep               grid over (d_model, h, N) -> sweep.csv
//! inspect-checkpoint  checkpoint                -> header summary
//! ```
//!
//! Exit codes: 0 success, 2 invalid input or usage, 3 numeric fault.

pub mod commands;
pub mod config;
pub mod error;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "kws", version, about = "Spoken command spotting: prepare data, train, evaluate and run a ConformerGRU classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the dataset manifest, including carved NULL-class noise clips.
    Prepare(commands::prepare::PrepareArgs),
    /// Train a model and keep the best checkpoint by dev accuracy.
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint on one split of a manifest.
    Eval(commands::eval::EvalArgs),
    /// Classify one WAV file.
    Infer(commands::infer::InferArgs),
    /// Train every cell of a (d_model, heads, layers) grid.
    Sweep(commands::sweep::SweepArgs),
    /// Print a checkpoint's header.
    InspectCheckpoint(commands::inspect::InspectArgs),
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> CliResult {
    match cli.command {
        Command::Prepare(args) => commands::prepare::run(args, out),
        Command::Train(args) => commands::train::run(args, out),
        Command::Eval(args) => commands::eval::run(args, out),
        Command::Infer(args) => commands::infer::run(args, out),
        Command::Sweep(args) => commands::sweep::run(args, out),
        Command::InspectCheckpoint(args) => commands::inspect::run(args, out),
    }
}
