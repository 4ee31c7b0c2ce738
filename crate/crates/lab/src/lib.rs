//! Experiment runner over `psido-core`.
//!
//! Each subcommand resolves its options (config file, then flags), runs one
//! experiment and writes a JSON report with CSV mirrors of its tables. Exit
//! codes are listed in [`error::exit`].

pub mod config;
pub mod error;
pub mod pslb;
pub mod report;
pub mod run;
pub mod spec;

use std::ffi::OsString;

use clap::Parser;

pub use error::{exit, LabError};

/// Parses `args`, runs the experiment and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match config::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID_INPUT } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: config::Cli) -> Result<i32, LabError> {
    let (common, command) = config::resolve(cli)?;
    let outcome = run::run(&common, &command)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    for path in run::write_outputs(&common, &outcome)? {
        println!("wrote {}", path.display());
    }
    let failures = outcome.report.failures();
    if failures.is_empty() {
        Ok(exit::OK)
    } else {
        let names: Vec<&str> = failures.iter().map(|c| c.name.as_str()).collect();
        eprintln!("error: {}", LabError::Assertion(names.join(", ")));
        Ok(exit::ASSERTION)
    }
}
