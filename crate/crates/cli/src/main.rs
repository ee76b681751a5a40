//! `newscap`: corpus ingestion, alignment data, contexts, generation through
//! a model endpoint, evaluation and loss audits.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "newscap", version, about = "Entity-aware news image captioning toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Documents processed in parallel (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and segment a raw JSONL corpus.
    Ingest(commands::ingest::IngestArgs),
    /// Build SENT, ENT and CAP samples and mini-groups.
    BuildAlignment(commands::alignment::AlignmentArgs),
    /// Build contexts under one regime.
    BuildContext(commands::context::ContextArgs),
    /// Run self-supplemented generation against a model endpoint.
    Generate(commands::generate::GenerateArgs),
    /// Score predictions against reference captions.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Recompute task losses from a trainer's log-prob dump.
    LossAudit(commands::loss::LossArgs),
    /// Serve the rule-based mock model.
    MockModel(commands::mock::MockArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest::run(&cli.common, a),
        Command::BuildAlignment(a) => commands::alignment::run(&cli.common, a),
        Command::BuildContext(a) => commands::context::run(&cli.common, a),
        Command::Generate(a) => commands::generate::run(&cli.common, a),
        Command::Evaluate(a) => commands::evaluate::run(&cli.common, a),
        Command::LossAudit(a) => commands::loss::run(&cli.common, a),
        Command::MockModel(a) => commands::mock::run(&cli.common, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
