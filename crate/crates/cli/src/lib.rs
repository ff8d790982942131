//! Command-line front end: reads fragment documents, runs analyses and
//! writes reports and certificates.

pub mod document;
pub mod report;

pub use document::{Analysis, Document, SchemaError};
pub use report::{run, Report, RunOptions, Section, Status};

/// Environment variable overriding the polytope dimension cap.
pub const DIM_CAP_VAR: &str = "GMT_LAB_DIM_CAP";
