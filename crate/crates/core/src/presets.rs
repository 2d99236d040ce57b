//! Bundled generating scenarios.
//!
//! The JSON files under `presets/` are produced by the `derive_eta` example;
//! see that file for how each one was solved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::TruthEta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub eta: TruthEta,
    pub delta_min: f64,
    /// What the preset was solved to reproduce (gap vector or EDTR probabilities).
    pub target: serde_json::Value,
}

const SOURCES: [(&str, &str); 3] = [
    ("design1-simulation", include_str!("../presets/design1-simulation.json")),
    ("general-simulation", include_str!("../presets/general-simulation.json")),
    ("engage", include_str!("../presets/engage.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<Preset> {
    let (_, text) = SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidSpec(format!("unknown preset `{name}`")))?;
    let preset: Preset = serde_json::from_str(text)?;
    preset.eta.validate()?;
    Ok(preset)
}

pub fn design1_simulation() -> Preset {
    preset("design1-simulation").expect("bundled preset parses")
}

pub fn general_simulation() -> Preset {
    preset("general-simulation").expect("bundled preset parses")
}

pub fn engage() -> Preset {
    preset("engage").expect("bundled preset parses")
}
