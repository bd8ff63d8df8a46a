//! Configuration, serialization and the experiment runner behind the CLI.

pub mod config;
pub mod output;
pub mod suite;
pub mod svg;

pub use config::{parse_args, Cli, Experiment, GridSpec, OutputFormat, RunConfig};
pub use output::{curve_csv, curve_json, RunManifest, CSV_COLUMNS};
pub use suite::{run_suite, SuiteOutcome};
