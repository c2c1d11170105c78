//! Command-line front end: argument parsing, sweep orchestration and
//! CSV / JSON serialization of the analytic and Monte Carlo results.

pub mod args;
pub mod commands;
pub mod format;
pub mod output;

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

pub use args::{Cli, Command, OutputFormat};
pub use output::{Cell, OutputEnvelope, Provenance, Report, Table};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for a runtime failure such as an unwritable output path.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit status for invalid arguments.
pub const EXIT_USAGE: i32 = 2;

/// Failure of a CLI invocation, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Runtime(err) => write!(f, "{err:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<siftless_core::Error> for CliError {
    /// Core errors all stem from parameters the user supplied.
    fn from(err: siftless_core::Error) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Runtime(err.into())
    }
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| {
                CliError::Runtime(
                    anyhow::Error::new(e).context(format!("cannot write {}", path.display())),
                )
            })?;
            file.write_all(bytes)?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()?;
            Ok(())
        }
    }
}

/// Serializes `report` in the requested format.
pub fn render(report: &Report, format: OutputFormat) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => report.write_csv(&mut buf)?,
        OutputFormat::Json => report.write_json(&mut buf)?,
    }
    Ok(buf)
}

/// Runs a parsed command line and writes its output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    commands::dispatch(&cli.command)
}
