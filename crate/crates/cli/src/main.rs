//! `agentx`: run one workflow, serve the FaaS gateway, run benchmark
//! matrices and render reports.
//!
//! Exit codes: 0 success, 1 run failure or exhausted cell, 2 usage or
//! configuration error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::FromArgMatches;

use crate::args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let matches = args::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Serve(a) => commands::serve(a),
        Command::Bench(a) => commands::bench(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("agentx: {e}");
            ExitCode::from(e.code())
        }
    }
}
