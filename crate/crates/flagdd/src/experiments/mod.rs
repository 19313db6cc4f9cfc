//! Monte-Carlo studies and their configuration.

mod config;
mod output;
mod runner;

pub use config::{AfdmSettings, EstimatorSettings, ExperimentConfig, PreambleSettings, Study};
pub use output::{ResultRow, ResultTable, CSV_HEADER};
pub use runner::{compute_table, curtain_masked_channel, run_study, StudyOutput};
