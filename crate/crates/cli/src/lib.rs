//! The `aap` command line: config resolution, subcommand drivers, structured output and
//! the acceptance checks behind `aap selftest`.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub mod checks;
pub mod commands;
pub mod config;
mod errors;
pub mod record;

pub use record::{Document, Record, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "AAP_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in field `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn config(field: &str, msg: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// What a subcommand hands back: the document to write and the exit status it implies.
#[derive(Debug)]
pub struct Outcome {
    pub doc: Document,
    pub status: i32,
    /// Plain-text report for stderr.
    pub report: Vec<String>,
}

fn set_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n = config::parse_as::<usize>(THREADS_ENV, &v)?;
        if n == 0 {
            return Err(CliError::config(THREADS_ENV, "must be at least 1"));
        }
        // a pool may already exist when called twice in one process (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn emit(out: &Outcome, format: &str, path: Option<&str>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match format {
        "json" => buf.extend_from_slice(out.doc.to_json().as_bytes()),
        "csv" => out.doc.write_csv(&mut buf).map_err(|e| CliError::config("output", e.to_string()))?,
        other => return Err(CliError::config("format", format!("expected json or csv (got {other:?})"))),
    }
    match path {
        Some(p) => std::fs::write(p, &buf).map_err(|e| CliError::config("output", format!("cannot write {p}: {e}"))),
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::config("output", e.to_string())),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match config::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("aap: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &config::Cli) -> Result<i32, CliError> {
    set_threads()?;
    let file = match &cli.config {
        Some(p) => config::read_config_file(p)?,
        None => Default::default(),
    };
    let mut res = config::Resolver::new(file);
    let default_format = if matches!(cli.command, config::Command::Scaling(_)) { "csv" } else { "json" };
    let format: String = res.get("format", cli.format.as_ref(), default_format.to_string())?;
    let output: Option<String> = res.get_opt("output", cli.output.as_ref())?;
    let out = commands::dispatch(&cli.command, &mut res)?;
    for line in &out.report {
        eprintln!("{line}");
    }
    emit(&out, &format, output.as_deref())?;
    Ok(out.status)
}
