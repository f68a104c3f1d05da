//! Experiment harness: configuration, data ingestion, the repetition driver
//! and result tables.

pub mod config;
pub mod ingest;
pub mod output;
pub mod runner;

pub use config::{ColumnRef, ExperimentConfig, Method, OutputFormat};
pub use runner::{run_experiment, ExperimentResult, Metric, ResultRow};
