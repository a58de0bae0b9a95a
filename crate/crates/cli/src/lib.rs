//! Command-line front end and local review server.

pub mod args;
pub mod commands;
pub mod serve;

use std::process::ExitCode;

use anyhow::{Context, Result};

use args::{Cli, Command};

/// Exit status for configuration and I/O errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for bugs (panics).
pub const EXIT_INTERNAL: u8 = 3;

pub fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Scan(a) => commands::cmd_scan(a),
        Command::View(a) => commands::cmd_view(a),
        Command::Export(c) => commands::cmd_export(c),
        Command::Triage(c) => commands::cmd_triage(c),
        Command::Serve(a) => {
            let state = serve::AppState::load(&a.input.findings, &a.labels, a.root.clone(), a.threshold)?;
            let runtime = tokio::runtime::Runtime::new().context("cannot start async runtime")?;
            runtime.block_on(serve::serve(state, &a.host, a.port))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
