//! `invp` — invariant P-values for model checking.
//!
//! Subcommands cover the closed-form reference P-values, exact discrete and
//! partition-based P-values, the Monte-Carlo normality check on the residual
//! sphere, the location-scale ancillary check, and (T3, T4) acceptance
//! contours. Every run writes `report.json` with its full resolved
//! configuration; runs with the same configuration and seed produce
//! byte-identical outputs.

use clap::Parser;
use invp_cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
