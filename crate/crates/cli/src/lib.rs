//! Batch front end for the waveguide-QED engines: scenario files in, CSV
//! grids and JSON manifests out.

pub mod app;
pub mod config;
pub mod error;
pub mod format;
pub mod output;
pub mod plot;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{EngineChoice, Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
