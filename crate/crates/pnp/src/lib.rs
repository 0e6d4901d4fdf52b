//! File formats, configuration and commands around `pnp-core`.

pub mod bundle;
pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod export;
pub mod report;
pub mod tsv;

pub use error::{CliError, Result};
