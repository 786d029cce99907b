//! Benchmark harness for the `flowsketch` estimators: throughput under three
//! access patterns, error metrics under three evaluation protocols, and memory
//! accounting, each aggregated over seeded repeated runs into CSV rows.

mod algorithm;
pub mod harness;
pub mod report;
pub mod runs;
pub mod stats;

use thiserror::Error;

pub use algorithm::{Algorithm, AnyEstimator, EstimatorParams};
pub use harness::{RunPlan, ThroughputProtocol, ThroughputRun};
pub use report::{BenchReport, Row};
pub use stats::aggregate;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Sketch(#[from] flowsketch::Error),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("at least one run is required")]
    NoRuns,
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
