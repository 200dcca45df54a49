//! Command-line front end for `gamow-core`.
//!
//! Exit codes: 0 when every check passed, 1 on a verification failure,
//! 2 on invalid input.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand};
use config::{ConfigFile, Flags, RunConfig};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "gamow",
    version,
    about = "Higher-order Gamow state verifications"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evolve an operator and write its decay curves
    Evolve,
    /// Solve the pure-exponential constraints and compare with the binomial family
    ExpCheck,
    /// Check direct = background + residue for a model file
    Residue,
    /// List the purely exponential basis operators
    Basis,
}

pub const EXIT_PASSED: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

/// Outcome of [`run`], before anything is written.
#[derive(Debug)]
pub enum RunError {
    Input(anyhow::Error),
    Verification(anyhow::Error),
}

fn classify(e: anyhow::Error) -> RunError {
    let verification = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<gamow_core::Error>(),
            Some(gamow_core::Error::Verification(_))
        )
    });
    if verification {
        RunError::Verification(e)
    } else {
        RunError::Input(e)
    }
}

pub fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    // For `residue` the config file is the model, read by the command itself.
    let file: Option<ConfigFile> = match (&cli.command, &cli.flags.config) {
        (Command::Residue, _) | (_, None) => None,
        (_, Some(path)) => Some(config::read_json(path)?),
    };
    RunConfig::resolve(&cli.flags, file)
}

pub fn run(cli: &Cli) -> Result<(RunConfig, commands::Output), RunError> {
    let cfg = resolve(cli).map_err(RunError::Input)?;
    let output = match cli.command {
        Command::Evolve => commands::cmd_evolve(&cfg),
        Command::ExpCheck => commands::cmd_expcheck(&cfg),
        Command::Residue => commands::cmd_residue(&cfg, cli.flags.config.as_deref()),
        Command::Basis => commands::cmd_basis(&cfg),
    }
    .map_err(classify)?;
    Ok((cfg, output))
}

/// Runs the command, writes its output and maps the result to an exit code.
pub fn main_with(cli: &Cli) -> ExitCode {
    match run(cli) {
        Ok((cfg, output)) => {
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, &output.text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(output.text.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("error: writing output: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            eprintln!("{}", output.summary);
            ExitCode::from(if output.passed {
                EXIT_PASSED
            } else {
                EXIT_FAILED
            })
        }
        Err(RunError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(RunError::Verification(e)) => {
            eprintln!("verification failed: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
