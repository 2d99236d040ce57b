//! JSON input files for power studies and simulations.
//!
//! A power configuration names either a bundled preset or an explicit
//! design and truth, plus the study parameters:
//!
//! ```json
//! {
//!   "preset": "design1-simulation",
//!   "alpha": 0.05,
//!   "gamma": 0.2,
//!   "grid": { "start": 150, "stop": 500, "step": 50 },
//!   "datasets_per_n": 200,
//!   "draws_per_dataset": 500,
//!   "seed": 1
//! }
//! ```
//!
//! Explicit form: `"design": "design1"` (or a full design object) and
//! `"eta": { "theta_seq": [...], "lambda": { "plus": .., "minus": .. } }`,
//! with `"delta_min"` required.

use serde::{Deserialize, Serialize};

use crate::design::{ArmValues, DesignKind, SmartDesign};
use crate::error::{Error, Result};
use crate::power::{PowerSpec, TruthEta};
use crate::presets;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesignRef {
    Kind(String),
    Inline(SmartDesign),
}

impl DesignRef {
    pub fn resolve(&self) -> Result<SmartDesign> {
        match self {
            DesignRef::Kind(k) => SmartDesign::builtin(k.parse::<DesignKind>()?),
            DesignRef::Inline(d) => Ok(d.clone()),
        }
    }
}

/// Truth parameters without (or with an optional) design.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignRef>,
    pub theta_seq: Vec<f64>,
    pub lambda: ArmValues<f64>,
    #[serde(default = "half")]
    pub rand_prob_stage1: f64,
    #[serde(default = "half")]
    pub rand_prob_stage2: f64,
}

fn half() -> f64 {
    0.5
}

impl EtaConfig {
    /// Builds the truth for `design`, or for the file's own design when none
    /// is given. Both present and different is an error.
    pub fn resolve(&self, design: Option<&SmartDesign>) -> Result<TruthEta> {
        let own = self.design.as_ref().map(DesignRef::resolve).transpose()?;
        let design = match (design, own) {
            (Some(d), Some(o)) if *d != o => {
                return Err(Error::InvalidSpec(
                    "eta file names a different design than requested".to_owned(),
                ))
            }
            (Some(d), _) => d.clone(),
            (None, Some(o)) => o,
            (None, None) => return Err(Error::InvalidSpec("no design given for eta".to_owned())),
        };
        let eta = TruthEta {
            design,
            theta_seq: self.theta_seq.clone(),
            lambda: self.lambda,
            rand_prob_stage1: self.rand_prob_stage1,
            rand_prob_stage2: self.rand_prob_stage2,
        };
        eta.validate()?;
        Ok(eta)
    }
}

/// Reads an eta reference: a bundled preset name or a JSON file path.
pub fn load_eta(reference: &str, design: Option<&SmartDesign>) -> Result<TruthEta> {
    if let Ok(p) = presets::preset(reference) {
        if let Some(d) = design {
            if *d != p.eta.design {
                return Err(Error::InvalidSpec(format!(
                    "preset `{reference}` is defined for the {} design",
                    p.eta.design.kind()
                )));
            }
        }
        return Ok(p.eta);
    }
    let text = std::fs::read_to_string(reference)?;
    let cfg: EtaConfig = serde_json::from_str(&text)?;
    cfg.resolve(design)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    List(Vec<usize>),
    Range { start: usize, stop: usize, step: usize },
}

impl GridConfig {
    /// Expands a range inclusively; `stop` is included when reachable.
    pub fn expand(&self) -> Result<Vec<usize>> {
        match self {
            GridConfig::List(v) => Ok(v.clone()),
            GridConfig::Range { start, stop, step } => {
                if *step == 0 || start > stop {
                    return Err(Error::InvalidSpec(format!(
                        "invalid grid range {start}..={stop} step {step}"
                    )));
                }
                Ok((*start..=*stop).step_by(*step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub design: Option<DesignRef>,
    #[serde(default)]
    pub eta: Option<EtaConfig>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub delta_min: Option<f64>,
    pub grid: GridConfig,
    #[serde(default = "default_datasets")]
    pub datasets_per_n: usize,
    #[serde(default = "default_draws")]
    pub draws_per_dataset: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_alpha() -> f64 {
    0.05
}
fn default_gamma() -> f64 {
    0.2
}
fn default_datasets() -> usize {
    PowerSpec::DEFAULT_DATASETS
}
fn default_draws() -> usize {
    PowerSpec::DEFAULT_DRAWS
}

impl PowerConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves into a validated spec; `seed` fills in a missing seed.
    pub fn into_spec(self, seed: impl FnOnce() -> u64) -> Result<PowerSpec> {
        let preset = self.preset.as_deref().map(presets::preset).transpose()?;
        let design = self.design.as_ref().map(DesignRef::resolve).transpose()?;
        let eta = match (&self.eta, &preset) {
            (Some(cfg), _) => cfg.resolve(design.as_ref().or(preset.as_ref().map(|p| &p.eta.design)))?,
            (None, Some(p)) => {
                if design.as_ref().is_some_and(|d| *d != p.eta.design) {
                    return Err(Error::InvalidSpec("design conflicts with preset".to_owned()));
                }
                p.eta.clone()
            }
            (None, None) => {
                return Err(Error::InvalidSpec("config needs either `preset` or `eta`".to_owned()))
            }
        };
        let delta_min = self
            .delta_min
            .or(preset.as_ref().map(|p| p.delta_min))
            .ok_or_else(|| Error::InvalidSpec("missing `delta_min`".to_owned()))?;
        let spec = PowerSpec {
            eta,
            alpha: self.alpha,
            gamma: self.gamma,
            delta_min,
            grid: self.grid.expand()?,
            datasets_per_n: self.datasets_per_n,
            draws_per_dataset: self.draws_per_dataset,
            seed: self.seed.unwrap_or_else(seed),
        };
        spec.validate()?;
        Ok(spec)
    }
}
