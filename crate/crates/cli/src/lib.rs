//! The `exitspec` command-line tool.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;
pub mod suite;

use std::ffi::OsString;

use clap::Parser;
use exitspec::{Error, Result};

use crate::args::{Cli, Command};
use crate::commands::Outcome;

/// Worker threads come from `EXITSPEC_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(text) = std::env::var("EXITSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("EXITSPEC_THREADS must be a positive integer, got '{text}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let (outcome, output): (Outcome, _) = match &cli.command {
        Command::Spectrum(a) => (commands::spectrum(a)?, &a.output),
        Command::CompareSpace(a) => (commands::compare_space(a)?, &a.output),
        Command::Balance(a) => (commands::balance(a)?, &a.output),
        Command::Intrinsic(a) => (commands::intrinsic(a)?, &a.output),
        Command::Simulate(a) => (commands::simulate(a)?, &a.output),
        Command::MeshVerify(a) => (commands::mesh_verify(a)?, &a.output),
        Command::Suite(a) => (suite::run(a)?, &a.output),
        Command::ReadReport(a) => {
            print!("{}", commands::read(a)?);
            return Ok(true);
        }
    };
    commands::emit(output, &outcome)?;
    Ok(outcome.ok)
}

/// Run the tool on `argv` (program name first) and return the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("exitspec: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match configure_threads().and_then(|_| dispatch(&cli)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("exitspec: {e}");
            e.exit_code()
        }
    }
}
