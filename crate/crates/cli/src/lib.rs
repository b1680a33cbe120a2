//! Command-line front end for `reachtime`: JSON scenario files in, JSON
//! reports and CSV trajectories/sweeps out.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{Overrides, ScenarioConfig};
pub use error::CliError;
pub use report::RunReport;
