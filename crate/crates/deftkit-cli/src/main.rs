//! `deftkit`: the definition-extraction pipeline as one executable.
//!
//! Subcommands cover the full workflow — `convert` a corpus, `clean`
//! instances, `train` a model, `tag` new data, `evaluate` predictions, and
//! `augment` with encyclopedia-backed examples. Settings come from an
//! optional TOML config file; flags override it. Every command writes a
//! `manifest.json` describing how to reproduce its outputs.
//!
//! Exit codes: 0 success, 1 data error, 2 configuration error, 3 network
//! error.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "deftkit",
    version,
    about = "Definition extraction: corpus conversion, cleaning, training, tagging, evaluation, augmentation"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a corpus folder into task-ready files.
    Convert(commands::convert::ConvertArgs),
    /// Clean a `text<TAB>label` instance file.
    Clean(commands::clean::CleanArgs),
    /// Train a classifier (task 1) or tagger (task 2).
    Train(commands::train::TrainArgs),
    /// Label data with a trained model.
    Tag(commands::tag::TagArgs),
    /// Score predictions against gold labels.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Build weakly-labeled examples from encyclopedia summaries.
    Augment(commands::augment::AugmentArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match Config::load_opt(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(err) => return fail(err),
    };
    let result = match cli.command {
        Command::Convert(args) => commands::convert::run(&cfg, args),
        Command::Clean(args) => commands::clean::run(&cfg, args),
        Command::Train(args) => commands::train::run(&cfg, args),
        Command::Tag(args) => commands::tag::run(&cfg, args),
        Command::Evaluate(args) => commands::evaluate::run(&cfg, args),
        Command::Augment(args) => commands::augment::run(&cfg, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => fail(err),
    }
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("error: {:#}", err.inner());
    ExitCode::from(err.exit_code())
}
