//! Bayes error rate estimators, synthetic two-class scenarios with Monte
//! Carlo ground truth, and a reproducible harness for benchmarking the
//! estimators against each other.

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod ground_truth;
pub mod harness;
pub mod math;
pub mod reporting;
pub mod scenarios;

pub use dataset::{Label, LabeledDataset};
pub use error::{Error, Result};
pub use scenarios::{build_scenario, Family, ScenarioParams, ScenarioSpec};
