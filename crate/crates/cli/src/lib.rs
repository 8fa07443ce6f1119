//! Command-line front end for the noisy quantum walk experiments.
//!
//! ```text
//! qwalk <simulate|sweep|mixing|decay|resources|oracle-check> [flags] [--config FILE]
//! ```
//!
//! Results are written as CSV with `#` provenance comments, to `--out` or
//! stdout. Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 numerical failure.

pub mod config;
pub mod error;
pub mod run;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::io::Write;

pub use config::{parse_config, Args, Command, RunConfig};
pub use error::CliError;
pub use table::{Cell, ResultTable, Table};

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(argv) {
        Ok(cfg) => cfg,
        Err(config::ParseOutcome::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(config::ParseOutcome::Error(e)) => {
            eprintln!("qwalk: {e}");
            return e.exit_code();
        }
    };
    finish(run::run(&cfg))
}

/// Prints the outcome of a run and maps it to an exit code.
fn finish(result: Result<Option<String>, CliError>) -> i32 {
    match result {
        Ok(Some(csv)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(csv.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return 1;
            }
            0
        }
        Ok(None) => 0,
        Err(e) => {
            eprintln!("qwalk: {e}");
            e.exit_code()
        }
    }
}
