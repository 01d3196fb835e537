//! `dptom`: command-line front end for the stability and fluctuation
//! analysis of a driven optomechanical cavity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let threads = config::thread_count(cli.threads, std::env::var("DPTOM_THREADS").ok())?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let (bytes, out) = match &cli.command {
        Command::Branches(c) => (commands::branches(c)?, &c.output),
        Command::PhaseDiagram(c) => (commands::phase_diagram(c)?, &c.output),
        Command::Slice(c) => (commands::slice(c)?, &c.output),
        Command::Evolve(c) => (commands::evolve(c)?, &c.output),
        Command::Hysteresis(c) => (commands::hysteresis(c)?, &c.output),
        Command::Covariance(c) => (commands::covariance(c)?, &c.output),
        Command::Critical(c) => (commands::critical(c)?, &c.output),
        Command::Spectrum(c) => (commands::spectrum(c)?, &c.output),
    };
    output::emit(out.out.as_deref(), &bytes)
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args_os().collect(), &Command::NAMES) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
