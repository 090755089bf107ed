//! The `descry` command line: ingest, simulate, train, describe,
//! uncertainty and report, each writing its artifacts and a
//! `manifest.json` into an output directory.
//!
//! [`run`] takes the argument vector and returns the process exit code:
//! 0 on success, 2 on a usage error, 1 on a runtime error. Failures are
//! printed to stderr as JSON naming the module, operation and error code,
//! and are also written to `error.json` in the output directory.

pub mod args;
mod commands;
pub mod error;
mod io;
mod report;
pub mod svg;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::CliError;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DESCRY_THREADS";

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn parse(argv: Vec<OsString>) -> Result<Command, i32> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return Err(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match (cli.config, cli.command) {
        (Some(path), _) => {
            let fail = |e: CliError| {
                eprintln!("{}", e.to_json());
                e.exit_code()
            };
            let value = io::read_json("config", &path).map_err(fail)?;
            let mut tokens = args::config_to_argv(&value).map_err(|m| fail(CliError::usage("config", m)))?;
            if let Some(out) = cli.out {
                tokens.retain(|t| !t.starts_with("--out="));
                tokens.push(format!("--out={}", out.display()));
            }
            match Cli::try_parse_from(tokens) {
                Ok(Cli { command: Some(c), .. }) => Ok(c),
                Ok(_) => Err(fail(CliError::usage("config", "config names no command"))),
                Err(e) => Err(fail(CliError::usage("config", e.to_string().trim().to_string()))),
            }
        }
        (None, Some(c)) => Ok(c),
        (None, None) => {
            eprintln!("descry: a subcommand or --config is required (see --help)");
            Err(2)
        }
    }
}

/// Executes one parsed command.
pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => commands::ingest(a, command),
        Command::Simulate(a) => commands::simulate(a, command),
        Command::Train(a) => commands::train_cmd(a, command),
        Command::Describe(a) => commands::describe(a, command),
        Command::Uncertainty(a) => commands::uncertainty(a, command),
        Command::Report(a) => report::report(a, command),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    configure_threads();
    let command = match parse(argv.into_iter().map(Into::into).collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match execute(&command) {
        Ok(()) => 0,
        Err(e) => {
            let json = e.to_json();
            eprintln!("{json}");
            if !matches!(command, Command::Report(_)) {
                let out = command.out();
                if std::fs::create_dir_all(out).is_ok() {
                    let _ = std::fs::write(out.join("error.json"), json + "\n");
                }
            }
            e.exit_code()
        }
    }
}
