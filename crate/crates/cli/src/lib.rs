//! The `msep` experiment runner.
//!
//! Every subcommand is a pure function of its resolved configuration and
//! seed. Reports share one envelope: `command`, the resolved `params`,
//! command-specific `results`, acceptance `checks`, and a `meta` block that
//! holds the only non-deterministic field (the timestamp).

pub mod config;
pub mod report;
pub mod schema;

mod commands;

use std::ffi::OsString;

use clap::Parser;
use serde_json::Value;

pub use config::{Cli, Command};
pub use report::{Check, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0} acceptance check(s) failed")]
    CheckFailed(usize),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<msep_core::Error> for CliError {
    fn from(e: msep_core::Error) -> Self {
        use msep_core::Error as E;
        match e {
            E::Io(_) | E::Format(_) => CliError::Io(e.to_string()),
            E::Dimension { .. }
            | E::ThetaOutOfRange(_)
            | E::InvalidParams(_)
            | E::EmptyInput(_)
            | E::IndexOutOfRange { .. } => CliError::Config(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Runs a parsed command and returns its report, without writing it.
pub fn execute(cmd: &Command) -> Result<Report, CliError> {
    commands::dispatch(cmd)
}

/// Parses `args`, runs the command, writes the report and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("msep: {e}");
            e.exit_code()
        }
    }
}

fn run_command(cmd: &Command) -> Result<(), CliError> {
    let report = execute(cmd)?;
    let value = report.to_value()?;
    if let Err(errs) = schema::validate_report(&value) {
        return Err(CliError::Internal(format!(
            "report violates schema: {errs:?}"
        )));
    }
    report::write(cmd, &value)?;
    let failed = report.failed_checks();
    if cmd.common().check && failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}

/// The report with its `meta` block removed, for reproducibility checks.
pub fn deterministic_part(report: &Value) -> Value {
    let mut v = report.clone();
    if let Some(o) = v.as_object_mut() {
        o.remove("meta");
    }
    v
}
