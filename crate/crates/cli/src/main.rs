//! `nestspec` command-line interface.
//!
//! Exit codes: 0 success, 2 usage or input parse error, 3 fit failure,
//! 4 I/O failure, 5 theorem-backed ordering violated.

mod args;
mod commands;
mod failure;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NESTSPEC_LOG"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let failure::CliError::Fit(nestspec::Error::Convergence { trace, .. }) = &e {
                for step in trace {
                    log::debug!("iteration {}: objective {:e}, step {:e}", step.iteration, step.objective, step.step_norm);
                }
            }
            eprintln!("nestspec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
