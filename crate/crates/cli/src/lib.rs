//! Library side of the `toporeg` command-line tool: field and diagram file
//! formats plus the computations behind each subcommand.

pub mod app;
pub mod diagram_file;
mod error;
pub mod fieldio;
pub mod numfmt;
pub mod ops;

pub use error::{CliError, Result};
