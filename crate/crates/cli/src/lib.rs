//! Batch front-end: analytic evaluation, Monte Carlo validation and grid
//! tabulation of last-passage occupation functionals.

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{cmd_eval, cmd_simulate, cmd_table, cmd_validate, CliError, Report};
pub use config::{ConfigError, Grid, RunConfig};
