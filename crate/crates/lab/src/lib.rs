//! Command-line laboratory around `qrcsl-core`: config files with explicit
//! units, deterministic parallel drivers, and CSV/JSON result envelopes.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod units;

pub use commands::{execute, run, Outcome};
pub use config::{parse_config, RunConfig, Subcommand};
pub use error::LabError;
pub use output::ResultEnvelope;
