//! Scenario runner for the `qmaction` toolkit.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a solver or
//! verification check did not converge, 3 I/O failure.

pub mod batch;
pub mod error;
pub mod output;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use runner::{run, RunManifest, RunOptions};
pub use scenario::{parse_scenario, parse_str, Scenario};
