//! Command-line front end. `run` parses arguments, dispatches, prints the
//! result in the chosen format and returns the process exit code:
//! 0 on success, 1 when a verification or simulation fails, 2 on bad input.

pub mod args;
pub mod commands;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{Cli, Command, Format};
use commands::{CliError, Outcome};

fn configure_threads() {
    if let Some(n) = std::env::var("DISPERSYM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Conditions { k, gauged } => commands::conditions(*k, *gauged),
        Command::Recursion { k, m, out } => commands::recursion(*k, *m, out.as_deref()),
        Command::Verify(a) => commands::verify(a),
        Command::Check { k, coeffs, gauged, theta_override } => commands::check(*k, coeffs, *gauged, theta_override),
        Command::Simulate { config, csv } => commands::simulate(config, csv.as_deref()),
        Command::DumpSymbols { k, stage, selfadjoint, repaired } => {
            commands::dump_symbols(*k, *stage, *selfadjoint, *repaired)
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    match dispatch(&cli.command) {
        Ok(out) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
                Format::Text => out.text,
            };
            // a closed pipe (`| head`) is not an error worth a panic
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.pass {
                0
            } else {
                1
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("failed: {msg}");
            1
        }
    }
}
