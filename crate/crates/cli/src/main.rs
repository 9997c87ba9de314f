//! `subideal` command-line tool.
//!
//! Exit codes: 0 success (all checks passed for `verify`), 1 numeric failure
//! or failed check, 2 usage or configuration error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Freqz(o) => commands::freqz(o).map(|_| true),
        Command::Impulse(o) => commands::impulse(o).map(|_| true),
        Command::Apply(o) => commands::apply(o).map(|_| true),
        Command::Verify(o) => commands::verify(o),
        Command::Figures(o) => commands::figures(o).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("subideal: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("subideal: {e}");
            ExitCode::from(e.code)
        }
    }
}
