//! `liyau`: files, flags and thread pools around `liyau-core`.
//!
//! Exit codes: 0 success, 1 a guaranteed inequality (or a selftest check)
//! failed, 2 bad input or unreadable/unwritable files, 3 engine failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod exec;
pub mod io;
pub mod report;
pub mod scenarios;
pub mod selftest;

use std::ffi::OsString;

use clap::Parser;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;

/// Parse `args` (including the program name) and run.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match args::Cli::try_parse_from(args) {
        Ok(cli) => commands::run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}
