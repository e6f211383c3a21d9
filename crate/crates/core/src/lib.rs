//! Analysis core for evolutionary multi-objective optimization runs.
//!
//! The pipeline goes from run logs (built-in engines or imported) through
//! down-sampling, per-generation quality measures and two levels of
//! similarity, to the structures behind the comparison views.

pub mod analytics;
pub mod benchmarks;
pub mod error;
pub mod evolution;
pub mod ingest;
pub mod measures;
pub mod model;
pub mod similarity;
pub mod store;

pub use error::{Error, Result};
