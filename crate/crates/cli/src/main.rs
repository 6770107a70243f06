//! `arground` command-line entry point.

mod args;
mod artifact;
mod commands;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes, mapped to exit codes 1 (usage), 2 (data), 3 (backend).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Backend(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Backend(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Backend(m) => write!(f, "backend error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::ExportSft(a) => commands::export_sft(a),
        Command::RejectSample(a) => commands::reject_sample(a),
        Command::Fill(a) => commands::fill(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Split(a) => commands::split(a),
        Command::Report(a) => commands::report(a),
        Command::Ingest(a) => commands::ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arground: {e}");
            ExitCode::from(e.code())
        }
    }
}
