use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    // GAMOW_SEED is reserved; nothing in this version is random.
    gamow_cli::main_with(&gamow_cli::Cli::parse())
}
