//! Scenario runner and calibration for the `eitsq` simulator.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod model;
pub mod output;
pub mod record;
pub mod scenario;

pub use calibrate::calibrate;
pub use config::Config;
pub use error::CliError;
pub use record::CalibrationRecord;
pub use scenario::{run_scenario, SCENARIOS};
