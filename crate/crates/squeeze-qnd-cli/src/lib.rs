//! Library side of the `sqnd` command-line harness.
//!
//! Split out of the binary so the config parser and command drivers are
//! testable (and fuzzable) without spawning processes.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{concentrate, params_check, purify, qnd_verify, CliError, CommandOutcome,
    CommonOpts};
pub use config::{ConfigError, RunConfig};
