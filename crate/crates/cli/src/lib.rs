//! Batch runner for the spinerase experiments.
//!
//! A run is `spinerase <subcommand> --config <file>`: the TOML file is parsed
//! into a [`config::RunConfig`], executed once or over a sweep grid, and
//! written as a headered CSV plus a JSON summary. Identical configurations
//! (including the seed) produce byte-identical files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{parse_config, RunConfig, Subcommand};
pub use error::CliError;
pub use output::{run, Artifacts, SCHEMA_VERSION};
