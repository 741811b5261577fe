//! `twc`: capacity regions of two-way channels from the command line.
//!
//! Every subcommand produces one CSV table and a short text report. With
//! `--out` the table goes to that file and the report to stdout; without it
//! the table goes to stdout and the report to stderr.
//!
//! Exit codes: 0 on success, 2 for invalid input (parse, validation,
//! constraint, structure or domain errors), 3 for numeric failures.

mod args;
mod commands;

use clap::Parser;
use std::process::ExitCode;

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var("TWC_THREADS") {
        let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            twc_core::Error::Validation(format!(
                "TWC_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<twc_core::Error>() {
        Some(e) if e.is_numeric() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
