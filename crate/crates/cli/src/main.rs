//! `doagc` command-line driver.

mod analyze;
mod args;
mod output;
mod run;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "doagc", version, about = "Multi-view graph clustering with adaptive graph reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with exact per-view homophily.
    Synth(synth::SynthArgs),
    /// Train on a dataset directory and write trace, summary, embedding and assignments.
    Train(run::TrainCmd),
    /// Print per-view homophily of the original, similarity and reconstructed graphs.
    Analyze(analyze::AnalyzeArgs),
    /// Train once per value of one hyperparameter and tabulate the results.
    Sweep(run::SweepCmd),
}

/// Invalid invocation detected after argument parsing; exits with status 2
/// like clap's own usage errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<doagc::Error>() {
        Some(doagc::Error::Config(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth::run(&a),
        Command::Train(a) => run::train(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::Sweep(a) => run::sweep(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
