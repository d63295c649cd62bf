//! Scenario files, figure presets and CSV output for the `dsb-sim` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use commands::{execute, run, Command, Table};
pub use config::{ScenarioConfig, Sweep, SweepParameter};
pub use error::CliError;
pub use presets::Preset;

use std::path::Path;

/// Resolves the scenario from an optional preset and an optional config file.
/// With a preset the file may be partial; its keys are merged over the preset.
pub fn load_scenario(config: Option<&Path>, preset: Option<Preset>) -> Result<ScenarioConfig, CliError> {
    match (config, preset) {
        (None, None) => Err(CliError::new("config", "either --config or --preset is required")),
        (Some(path), None) => ScenarioConfig::from_value(config::read_json(path)?),
        (path, Some(p)) => {
            let mut base = serde_json::to_value(p.config()).expect("presets serialise");
            if let Some(path) = path {
                config::merge(&mut base, config::read_json(path)?);
            }
            ScenarioConfig::from_value(base)
        }
    }
}
