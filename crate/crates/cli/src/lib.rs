//! Data and I/O side of the FWUA solvers: synthetic instance generators,
//! edge-list and ratings ingestion, the JSON instance container, trace and
//! metrics writers, and the `fwua` command line.

pub mod cli;
pub mod error;
pub mod output;
pub mod problems;
pub mod run;

pub use error::DataError;
pub use problems::{Metrics, ProblemInstance, ProblemKind};
