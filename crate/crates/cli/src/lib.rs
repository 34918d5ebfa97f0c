//! Configuration, orchestration and file output for the `xxrelay` tool.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Figure, Mode, Overrides, RunConfig};
pub use error::CliError;
pub use run::{run, RunSummary};
