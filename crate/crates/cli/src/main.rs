mod args;
mod commands;
mod error;
mod report;
mod spec_file;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Globals;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // help and version requests are not failures
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let globals = Globals {
        normalize: cli.normalize,
        tol: cli.tol,
    };
    let outcome = match &cli.command {
        Command::Classify(a) => commands::classify(a, globals),
        Command::Synthesize(a) => commands::synthesize_cmd(a, globals),
        Command::Verify(a) => commands::verify(a, globals),
        Command::Spectrum(a) => commands::spectrum_cmd(a, globals),
        Command::Sweep(a) => commands::sweep_cmd(a, globals),
    };
    match outcome {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(outcome.report.to_pretty().as_bytes())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
