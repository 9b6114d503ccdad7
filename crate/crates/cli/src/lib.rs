//! Files, reports and the command-line front end around `despeckle-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;

pub use args::Cli;
pub use error::{CliError, Result};
