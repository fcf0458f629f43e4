//! Command-line front end: configuration, snapshots, CSV output and the
//! verification batteries.

pub mod commands;
pub mod config;
pub mod error;
pub mod records;
pub mod snapshot;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "muskat", version, about = "Three-phase Muskat interface solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration; defaults are used when omitted.
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set grid.n=512`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the initial interfaces.
    Simulate(Common),
    /// Continue a run from a snapshot.
    Resume {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Run the numerical self-checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// symbols, identities, rellich, traces, darcy or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Tabulate the flat-state dispersion relation.
    Dispersion(Common),
    /// Sample velocity and pressure on a grid of points.
    Field {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn load(c: &Common) -> CliResult<RunConfig> {
    RunConfig::load(c.config.as_deref(), &c.set)
}

fn dispatch(cmd: Command) -> CliResult<i32> {
    match cmd {
        Command::Simulate(c) => commands::simulate(&load(&c)?),
        Command::Resume { common, snapshot } => commands::resume(&load(&common)?, &snapshot),
        Command::Verify { common, suite } => commands::verify(&load(&common)?, &suite),
        Command::Dispersion(c) => commands::dispersion(&load(&c)?),
        Command::Field { common, snapshot } => commands::field(&load(&common)?, snapshot.as_deref()),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
