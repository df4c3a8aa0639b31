//! Tabular cardiovascular-disease prediction toolkit: four feature selectors,
//! seven classifiers and the evaluation grid that crosses them.

pub mod data;
pub mod error;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod numerics;
pub mod pipeline;
pub mod report;
pub mod selectors;
pub mod synthetic;

pub use error::{Error, Result};
