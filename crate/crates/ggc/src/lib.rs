//! Configuration files, report formats, parallel drivers and the command-line
//! front end for `ggc-core`.
//!
//! A run is described by one TOML document ([`config::parse_config`]), executed
//! by [`commands::run`], and leaves exactly one output file (CSV or JSON)
//! plus a `key=value` summary line on stdout.

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;

pub use commands::{execute, run, Outcome, Report, RunError};
pub use config::{parse_config, serialize_config, ConfigError, ConfigErrors, RunConfig};
