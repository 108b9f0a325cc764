//! Config files, CSV output and the `eif` command line on top of `eif-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod rng;

pub use config::RunConfig;
pub use error::CliError;
