//! Scenario files, experiment runners and output writers behind the
//! `holobeam` binary.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod repro;

pub use config::ScenarioConfig;
pub use error::{CliError, Result};
pub use experiment::{BeamKind, Experiment};
