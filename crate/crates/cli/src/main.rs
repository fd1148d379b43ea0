//! `ebm`: command-line front end for the Expanding Baker Map laboratory.

mod args;
mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ebm_core::Error;

use crate::args::Cli;
use crate::config::JobConfig;
use crate::run::{CheckFailed, UsageError};

const EXIT_USAGE: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<CheckFailed>() {
            return EXIT_NUMERIC;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::NotFound(_) | Error::RegionMismatch(_) => EXIT_NOT_FOUND,
                Error::InvalidParameter { .. }
                | Error::OutOfRange { .. }
                | Error::InvalidSpec(_)
                | Error::DepthTooLarge(_)
                | Error::UnsupportedRegion(_)
                | Error::OutOfDomain { .. } => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            };
        }
    }
    EXIT_NUMERIC
}

/// Arguments from the command line, or from a job file given as the only flag.
fn argv() -> Result<Vec<String>, anyhow::Error> {
    let raw: Vec<String> = std::env::args().collect();
    if raw.get(1).map(String::as_str) != Some("--config") {
        return Ok(raw);
    }
    let [_, _, path] = &raw[..] else {
        return Err(anyhow::anyhow!(UsageError(
            "--config takes a path and no other arguments".into()
        )));
    };
    JobConfig::load(&PathBuf::from(path))
        .and_then(|job| job.to_argv())
        .map_err(|e| anyhow::anyhow!(UsageError(format!("{e:#}"))))
}

fn set_threads() -> Result<(), anyhow::Error> {
    let Ok(v) = std::env::var("EBM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        anyhow::anyhow!(UsageError(format!(
            "EBM_THREADS={v} is not a positive integer"
        )))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = argv().and_then(|argv| {
        let cli = match Cli::try_parse_from(argv) {
            Ok(cli) => cli,
            Err(e) => {
                let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
                let _ = e.print();
                return Ok(Some(code));
            }
        };
        set_threads()?;
        run::dispatch(&cli).map(|_| None)
    });
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
