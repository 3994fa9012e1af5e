//! Configuration-driven simulation studies with CSV, SVG and JSON output.
//!
//! Replication `r` draws everything from [`run::replication_source`]`(seed, r)`,
//! so results do not depend on how many worker threads run them.

pub mod config;
pub mod io;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Centering, EstimationConfig, ExperimentConfig, ExperimentId};
pub use report::{IntervalRow, RunReport, SummaryRow};
pub use run::run_experiment;
