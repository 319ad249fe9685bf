//! Experiment runner for the paradiff numerical laboratory: config ingestion,
//! operator-norm estimation, the four scenarios and their structured outputs.

pub mod config;
pub mod corpus;
pub mod error;
pub mod opnorm;
pub mod output;
pub mod record;
pub mod scenarios;

pub use config::{ExperimentConfig, Scenario, SymbolFamily};
pub use error::{RunError, RunResult};
pub use record::{Metric, ResultRecord, Table, TableRow};
pub use scenarios::run;
