use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::scale::scale_config;

pub const PRESET_NAMES: [&str; 3] = ["flight", "breadboard_1_3", "paper_nominal"];

const FLIGHT: &str = include_str!("../../presets/flight.json");
const PAPER_NOMINAL: &str = include_str!("../../presets/paper_nominal.json");

/// Test-facility scale of the breadboard relative to flight.
pub const BREADBOARD_FACTOR: f64 = 1.0 / 3.0;

/// Shipped scenario by name. The breadboard is derived from flight by similitude scaling.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "flight" => ScenarioConfig::from_json(FLIGHT),
        "paper_nominal" => ScenarioConfig::from_json(PAPER_NOMINAL),
        "breadboard_1_3" => {
            let mut c = scale_config(&preset("flight")?, BREADBOARD_FACTOR)?;
            c.name = "breadboard_1_3".into();
            c.validate()?;
            Ok(c)
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}
