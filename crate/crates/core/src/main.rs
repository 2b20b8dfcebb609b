use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    tnbpa::cli::main_with(tnbpa::cli::Cli::parse())
}
