//! Command-line entry point: corpus prep, translation, scoring, reporting,
//! theory simulations, and conlang generation, with run manifests for
//! replayability.
//!
//! Exit codes: 0 success, 1 partial data errors, 2 configuration or
//! precondition errors.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing credentials, unreadable inputs: exit 2.
    Config(String),
    /// Some rows failed while others proceeded: exit 1.
    Data(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Parser)]
#[command(
    name = "shuffleval",
    version,
    about = "Reference-free MT quality evaluation via segment shuffling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter and truncate a corpus (article-selection rules).
    Prep(commands::prep::PrepArgs),
    /// Translate a corpus segment by segment.
    Translate(commands::translate::TranslateArgs),
    /// Score translations with the shuffle metric and/or the baseline.
    Score(commands::score::ScoreArgs),
    /// Correlations, aggregates, and the hallucination screen.
    Report(commands::report::ReportArgs),
    /// Bound-checking simulations.
    Theory(commands::theory::TheoryArgs),
    /// Generate constructed-language bundles.
    Conlang(commands::conlang::ConlangArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prep(args) => commands::prep::run(args),
        Command::Translate(args) => commands::translate::run(args),
        Command::Score(args) => commands::score::run(args),
        Command::Report(args) => commands::report::run(args),
        Command::Theory(args) => commands::theory::run(args),
        Command::Conlang(args) => commands::conlang::run(args),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
