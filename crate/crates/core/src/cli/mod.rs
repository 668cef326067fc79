//! Command-line surface of the `simgroup` binary.
//!
//! `simgroup <command> --config <path> [--out <dir>] [key=value ...]`
//!
//! The configuration format is described in [`config`]; report files are
//! written by [`emit`] and are byte-for-byte reproducible. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | malformed input or configuration |
//! | 3 | unbounded (no similarity constant exists) |
//! | 4 | infeasible within the search budget, or a failed check |
//! | 5 | precondition of the requested computation violated |

pub mod commands;
pub mod config;
pub mod emit;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::error::SimError;
pub use commands::Outcome;
pub use config::{Command, RunConfig};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Input = 2,
    Unbounded = 3,
    Infeasible = 4,
    Precondition = 5,
}

impl Exit {
    /// Exit status for a library error.
    pub fn for_error(e: &SimError) -> Self {
        match e {
            SimError::Precondition(_) | SimError::NotContraction(_) => Exit::Precondition,
            SimError::Convergence(_)
            | SimError::Saturation(_)
            | SimError::NearSingular(_)
            | SimError::InvalidWeight { .. } => Exit::Infeasible,
            SimError::NotSquare { .. }
            | SimError::NonFinite { .. }
            | SimError::DimensionMismatch { .. }
            | SimError::Domain(_)
            | SimError::Window(_)
            | SimError::Parse(_)
            | SimError::Io(_) => Exit::Input,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "simgroup",
    version,
    about = "Similarity of matrix semigroups to contraction semigroups"
)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Configuration overrides, `key=value`.
    overrides: Vec<String>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Input as i32
            } else {
                Exit::Ok as i32
            };
        }
    };
    let result = RunConfig::load(
        args.command,
        &args.config,
        &args.overrides,
        args.out.as_deref(),
    )
    .and_then(|cfg| {
        let outcome = commands::dispatch(&cfg)?;
        for (name, text) in &outcome.files {
            emit::write_atomic(&cfg.out, name, text)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(o) => {
            println!("{}", o.summary);
            o.exit as i32
        }
        Err(e) => {
            eprintln!("simgroup {}: {e}", args.command.as_str());
            Exit::for_error(&e) as i32
        }
    }
}
