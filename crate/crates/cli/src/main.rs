//! `netbec`: reproducible reports on walks, condensation and Bloch bands.

mod args;
mod bands;
mod bec;
mod classify;
mod output;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes: 0 success (inconclusive verdicts included), 1 usage, 2
/// numerical failure.
const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::ClassifyWalk(a) => classify::run(a),
        Command::BecReport(a) => bec::run(a),
        Command::BlochBands(a) => bands::run(a),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use netbec::Error as E;
    match e.chain().find_map(|c| c.downcast_ref::<E>()) {
        Some(
            E::NoConvergence { .. }
            | E::SingularMode { .. }
            | E::NonPositiveGroundState { .. }
            | E::BandTopViolation { .. }
            | E::GaugeRefused(_)
            | E::StageTooSmall { .. }
            | E::VertexBudget { .. }
            | E::SizeExceeded { .. },
        ) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}
