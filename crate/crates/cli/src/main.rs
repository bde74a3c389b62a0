//! `absa`: command-line front end for absa-core.
//!
//! Exit codes: 0 success, 1 validation or data error, 2 usage error.

mod cli;
mod commands;
mod config;

use std::process::ExitCode;

use absa_core::Exec;
use clap::{CommandFactory, Parser};
use log::{debug, error, warn};

use crate::cli::Cli;

fn main() -> ExitCode {
    let argv: Vec<_> = std::env::args_os().collect();
    let (argv, notes) = match config::merge(Cli::command(), argv) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("ABSA_LOG")
        .format_timestamp(None)
        .init();
    for n in notes {
        debug!("{n}");
    }

    let exec = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            set_threads(n);
            Exec::default()
        }
        None => Exec::default(),
    };

    let ctx = commands::Ctx::new(&cli.command, exec);
    match commands::run(&cli.command, &ctx) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            if !log::log_enabled!(log::Level::Error) {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
    {
        warn!("could not size the thread pool: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) {
    warn!("built without the parallel feature; ignoring --threads {n}");
}
