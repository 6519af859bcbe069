//! The `chi3` command-line front end.
//!
//! Exit codes: 0 success, 1 property failure or I/O error, 2 physics or
//! regime error, 64 usage error.

pub mod check;
pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use toml::Value;

pub use check::{run_checks, CheckSummary, Fault};
pub use commands::{simulate_linearized, McRun, McSettings};
pub use config::{Command, Format, Grid, RunConfig};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PHYSICS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Physics(String),
    Property(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Physics(_) => EXIT_PHYSICS,
            CliError::Property(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Physics(m) => write!(f, "{m}"),
            CliError::Property(m) => write!(f, "property failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Usage(m),
            Error::Io(m) => CliError::Io(m),
            other => CliError::Physics(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "chi3", version, about = "Noise spectra and photon statistics of a cavity with a cubic medium")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat TOML file of parameters and run settings.
    #[arg(long, global = true, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Comma-separated models: eha, hm, slm.
    #[arg(long, global = true, value_name = "LIST")]
    model: Option<String>,
    /// Frequency grid MIN:MAX:N, in units of A unless --unscaled.
    #[arg(long, global = true, value_name = "SPEC", allow_hyphen_values = true)]
    grid: Option<String>,
    /// Read the grid in rad/s.
    #[arg(long, global = true)]
    unscaled: bool,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long, global = true, value_name = "LIST")]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    ntraj: Option<usize>,
    /// Write raw trajectories (simulate).
    #[arg(long, global = true)]
    dump: bool,
    /// Override any config key, e.g. --set fc=0.5.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, global = true, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Closed-form spectra for the selected models.
    Spectrum,
    /// JSON report comparing the models and their oracles.
    Compare,
    /// Monte Carlo spectra and moments.
    Simulate,
    /// Moments, spectra and photon statistics of the inversion-free medium.
    Invfree,
    /// Run the property suite.
    Check,
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("CHI3_THREADS") {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("CHI3_THREADS must be a positive integer, got `{v}`"))),
        },
        _ => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let command = match cli.command {
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Compare => Command::Compare,
        Cmd::Simulate => Command::Simulate,
        Cmd::Invfree => Command::Invfree,
        Cmd::Check => Command::Check,
    };
    let mut flags: Vec<(&str, Value)> = Vec::new();
    if let Some(m) = cli.model {
        flags.push(("models", Value::String(m)));
    }
    if let Some(g) = cli.grid {
        flags.push(("grid", Value::String(g)));
    }
    if cli.unscaled {
        flags.push(("scaled", Value::Boolean(false)));
    }
    if let Some(o) = cli.out {
        flags.push(("out", Value::String(o)));
    }
    if let Some(f) = cli.format {
        flags.push(("formats", Value::String(f)));
    }
    if let Some(s) = cli.seed {
        let s = i64::try_from(s).map_err(|_| CliError::Usage("seed must fit in 63 bits".into()))?;
        flags.push(("seed", Value::Integer(s)));
    }
    if let Some(n) = cli.ntraj {
        flags.push(("ntraj", Value::Integer(n as i64)));
    }
    if cli.dump {
        flags.push(("dump", Value::Boolean(true)));
    }
    let fault = cli.inject_fault.map(|f| f.parse::<Fault>().map_err(CliError::Usage)).transpose()?;
    let threads = threads_from_env()?;
    let cfg = config::resolve(command, cli.params.as_deref(), &cli.sets, &flags, threads)?;
    cfg.params.validate()?;

    let run = || -> Result<Vec<PathBuf>, CliError> {
        match command {
            Command::Spectrum => commands::cmd_spectrum(&cfg),
            Command::Compare => commands::cmd_compare(&cfg),
            Command::Simulate => commands::cmd_simulate(&cfg),
            Command::Invfree => commands::cmd_invfree(&cfg),
            Command::Check => cmd_check(&cfg, fault),
        }
    };
    let files = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn cmd_check(cfg: &RunConfig, fault: Option<Fault>) -> Result<Vec<PathBuf>, CliError> {
    let summary = run_checks(fault);
    let meta = output::Metadata::new(cfg).with("fault", fault);
    output::ensure_dir(&cfg.out)?;
    let path = output::write_json(&cfg.out.join("check.json"), &meta, &summary)?;
    println!("{}", serde_json::to_string(&summary).unwrap_or_default());
    match summary.first_failure {
        None => Ok(vec![path]),
        Some(name) => {
            let detail = summary.properties.iter().find(|p| p.name == name).map(|p| p.detail.clone()).unwrap_or_default();
            Err(CliError::Property(format!("{name}: {detail}")))
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("chi3: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::from(Error::Config("x".into())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(Error::Unstable("x".into())).exit_code(), EXIT_PHYSICS);
        assert_eq!(CliError::from(Error::Io("x".into())).exit_code(), EXIT_FAILURE);
        assert_eq!(run(["chi3", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["chi3", "--help"]), EXIT_OK);
    }
}
