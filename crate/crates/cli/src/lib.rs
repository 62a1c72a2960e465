//! Batch front end for `panelqr`: simulate panels, fit chains, summarize
//! them and compute covariate effects, all through files.

pub mod commands;
pub mod config;
pub mod io;

use panelqr::Error;

/// Process exit status for an error: 2 configuration, 3 data or I/O,
/// 4 numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Domain(_) => 2,
        Error::Data(_) | Error::Io { .. } => 3,
        Error::Numeric(_) => 4,
    }
}
