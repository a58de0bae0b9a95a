use std::process::ExitCode;

use clap::Parser;
use pdflow::args::Cli;
use pdflow::{run, EXIT_CONFIG, EXIT_INTERNAL};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(_) => {
            eprintln!("internal error; please report this with the command that triggered it");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
