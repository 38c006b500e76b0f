//! `vss` — command-line driver for very-singular-solution profiles of fast
//! diffusion with gradient absorption.
//!
//! Exit status contract: `0` success, `1` failed verification checks,
//! `2` invalid configuration or arguments, `3` integration or measurement
//! failure, `64` command-line usage errors.

mod commands;
mod persist;
mod plot;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successful exits; everything
            // else is a usage error (64, the BSD sysexits convention).
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
