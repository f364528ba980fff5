//! `somm`: run multiplier methods and optimality checks on conic programs.

mod commands;
mod config;

use clap::{error::ErrorKind, Parser, Subcommand};
use config::{MethodChoice, RunArgs};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "somm",
    version,
    about = "Second-order method of multipliers for conic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method and report its history.
    Solve(RunArgs),
    /// Run the first- and second-order methods from the same start.
    Compare(RunArgs),
    /// Check derivatives, constraint qualifications and second-order
    /// conditions at the problem's solution.
    Check(RunArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => args.resolve(MethodChoice::Second).and_then(commands::cmd_solve),
        Command::Compare(args) => args.resolve(MethodChoice::Compare).and_then(commands::cmd_compare),
        Command::Check(args) => args.resolve(MethodChoice::Second).and_then(commands::cmd_check),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
