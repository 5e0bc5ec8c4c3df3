//! Command-line workbench over `gprlab-core`: figure data as CSV with
//! digest manifests, single-record queries, and structural checks.

pub mod app;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod query;
pub mod verify;

pub use app::{run, Cli, Outcome};
pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
