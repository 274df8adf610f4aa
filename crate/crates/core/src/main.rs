use std::process::ExitCode;

use clap::Parser;
use ppalign::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
