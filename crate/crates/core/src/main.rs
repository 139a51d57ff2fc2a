use std::process::ExitCode;

use clap::Parser;
use windplan::cli::{execute, Cli};

fn main() -> ExitCode {
    execute(Cli::parse())
}
