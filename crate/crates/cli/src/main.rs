//! `rotor`: design and check rotations of a trapped particle.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 infeasible or physically
//! invalid input, 3 truncation that failed to converge.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

mod args;
mod commands;
mod error;
mod manifest;

use std::path::PathBuf;

use clap::Parser;
use rotor_core::quantum::{Tolerances, TOLERANCE_ENV};

use args::{Cli, Command};
use commands::Context;
use error::{CliError, EXIT_OK, EXIT_USAGE};
use manifest::{RunManifest, VERSION};

/// Arguments after the program name with any output directory removed, so
/// the manifest only records what determines the results.
fn recorded_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn dispatch(command: &Command, ctx: &Context) -> Result<(), CliError> {
    match command {
        Command::Design(a) => commands::design(a, ctx),
        Command::Modes(a) => commands::modes(a, ctx),
        Command::Simulate(a) => commands::simulate(a, ctx),
        Command::Classical(a) => commands::classical(a, ctx),
        Command::Track(a) => commands::track(a, ctx),
        Command::Stability(a) => commands::stability(a, ctx),
        Command::Replay(a) => {
            let manifest = RunManifest::read(&a.manifest)?;
            if manifest.version != VERSION {
                eprintln!(
                    "warning: manifest written by version {}, replaying with {VERSION}",
                    manifest.version
                );
            }
            let argv = std::iter::once("rotor".to_string()).chain(manifest.args.iter().cloned());
            let mut cli = Cli::try_parse_from(argv)
                .map_err(|e| CliError::usage(format!("manifest arguments do not parse: {e}")))?;
            if matches!(cli.command, Command::Replay(_)) || cli.command.name() != manifest.command {
                return Err(CliError::usage("manifest does not record a replayable command"));
            }
            cli.command
                .set_out(a.out.clone().unwrap_or_else(|| PathBuf::from("rotor-replay")));
            let ctx = Context {
                tolerances: manifest.tolerances.into(),
                args: manifest.args.clone(),
            };
            dispatch(&cli.command, &ctx)
        }
    }
}

fn run() -> Result<(), CliError> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let tolerances = Tolerances::from_env()
        .map_err(|e| CliError::usage(format!("{TOLERANCE_ENV}: {e}")))?;
    let ctx = Context {
        tolerances,
        args: recorded_args(&argv),
    };
    dispatch(&cli.command, &ctx)
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
