//! Command-line front end: scenario configs, observation CSV io, SVG plots
//! and the subcommand dispatch used by the `fieldtrack` binary.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod plot;

pub use commands::{dispatch, Cli};
