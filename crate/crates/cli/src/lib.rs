//! Batch front-end for `esspec-core`: JSON problem configs in, JSON reports
//! and CSV curves out, plus the example gallery.

pub mod commands;
pub mod config;
pub mod exec;
pub mod gallery;
pub mod output;
pub mod report;

pub use commands::{run_analysis, Analysis, RunError};
pub use config::{load_str, ConfigError, ProblemConfig, Resolved};
pub use exec::Pool;
pub use report::ReportJson;
