//! Batch front-end for the synthmix theory and simulator.

pub mod args;
pub mod commands;
pub mod error;
pub mod grid;
pub mod output;
pub mod sweep;

pub use args::Cli;
pub use error::{CliError, CliResult};

/// Runs a parsed invocation and writes its output.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let outcome = commands::run(&cli.command)?;
    let out = commands::common_of(&cli.command).out.as_deref();
    outcome.output.write_to(out)?;
    match outcome.failure {
        Some(reason) => Err(CliError::ValidationFailed(reason)),
        None => Ok(()),
    }
}
