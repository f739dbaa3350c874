//! Scenario parsing, sweeps and dataset output for the `dpa-lab` command.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod point;
pub mod tables;

pub use config::{Format, Quantity, ScenarioArgs, ScenarioConfig};
pub use error::CliError;
pub use figures::run_figure;
pub use output::{write_artifact, Artifact, Cell, Dataset};
pub use point::{run_point, ResultRecord};
pub use tables::run_table;
