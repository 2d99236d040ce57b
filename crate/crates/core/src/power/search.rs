use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inferior_set, simulate_trial, true_best, true_delta, TruthEta};
use crate::error::{Error, Result};
use crate::mcb::set_of_best;
use crate::posterior::{draw_posterior, Reference};
use crate::rng::substream;
use crate::EdtrId;

/// Inputs of a power study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    pub eta: TruthEta,
    pub alpha: f64,
    /// One minus the target power.
    pub gamma: f64,
    /// Smallest log-odds gap below the best that must be screened out.
    pub delta_min: f64,
    pub grid: Vec<usize>,
    pub datasets_per_n: usize,
    pub draws_per_dataset: usize,
    pub seed: u64,
}

impl PowerSpec {
    pub const DEFAULT_DATASETS: usize = 1000;
    pub const DEFAULT_DRAWS: usize = 1000;
    pub const DESK_DATASETS: usize = 200;
    pub const DESK_DRAWS: usize = 500;

    pub fn validate(&self) -> Result<()> {
        self.eta.validate()?;
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.delta_min >= 0.0 && self.delta_min.is_finite()) {
            return bad(format!("delta_min must be a non-negative number, got {}", self.delta_min));
        }
        if self.grid.is_empty() {
            return bad("empty sample-size grid".to_owned());
        }
        if self.grid[0] == 0 || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("grid must be positive and strictly increasing: {:?}", self.grid));
        }
        if self.datasets_per_n == 0 || self.draws_per_dataset == 0 {
            return bad("datasets_per_n and draws_per_dataset must be at least 1".to_owned());
        }
        Ok(())
    }

    pub fn target_power(&self) -> f64 {
        1.0 - self.gamma
    }

    /// EDTRs that must be excluded; errors if that would include the best.
    pub fn inferior_set(&self) -> Result<Vec<EdtrId>> {
        let set = inferior_set(&true_delta(&self.eta), self.delta_min);
        let best = true_best(&self.eta);
        if set.contains(&best) {
            return Err(Error::InferiorSetContainsBest(best));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub n: usize,
    pub power: f64,
    /// Monte Carlo standard error `sqrt(p (1 - p) / datasets)`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub points: Vec<PowerPoint>,
    pub best: EdtrId,
    /// `logit(best) - logit(own)` per EDTR.
    pub delta_vector: Vec<f64>,
    /// True log-odds ratio against the best, `-delta`.
    pub zeta_true: Vec<f64>,
    pub inferior_set: Vec<EdtrId>,
    pub target_power: f64,
    pub recommended_n: Option<usize>,
}

/// Power at sample size `n`: the fraction of simulated trials whose analysis
/// puts every inferior EDTR's upper limit strictly below zero.
///
/// Each simulated trial is analysed exactly as a real one would be, with
/// the reference picked from its own data. A trial whose reference is itself
/// an inferior EDTR keeps it in the set of best and counts as a miss.
pub fn estimate_power(spec: &PowerSpec, n: usize) -> Result<PowerPoint> {
    spec.validate()?;
    let inferior = spec.inferior_set()?;
    if inferior.is_empty() {
        return Ok(PowerPoint { n, power: 1.0, se: 0.0 });
    }
    let design = &spec.eta.design;
    let hits = (0..spec.datasets_per_n)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let dataset = substream(spec.seed, &[n as u64, i as u64]);
            let data = simulate_trial(&spec.eta, n, substream(dataset, &[0]))?;
            let draws = draw_posterior(
                design,
                &data,
                spec.draws_per_dataset,
                substream(dataset, &[1]),
                Reference::Auto,
            )?;
            let mcb = set_of_best(&draws, spec.alpha)?;
            Ok(inferior
                .iter()
                .all(|&l| mcb.upper_limit(l).is_some_and(|u| u < 0.0)))
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&hit| hit)
        .count();
    let power = hits as f64 / spec.datasets_per_n as f64;
    let se = (power * (1.0 - power) / spec.datasets_per_n as f64).sqrt();
    Ok(PowerPoint { n, power, se })
}

/// Power at every grid point and the smallest `n` reaching `1 - gamma`.
pub fn sample_size_search(spec: &PowerSpec) -> Result<PowerCurve> {
    spec.validate()?;
    let inferior = spec.inferior_set()?;
    let delta = true_delta(&spec.eta);
    let points = spec
        .grid
        .iter()
        .map(|&n| estimate_power(spec, n))
        .collect::<Result<Vec<_>>>()?;
    let target = spec.target_power();
    let recommended_n = points
        .iter()
        .find(|p| p.power >= target - 1e-12)
        .map(|p| p.n);
    Ok(PowerCurve {
        points,
        best: true_best(&spec.eta),
        zeta_true: delta.iter().map(|d| -d).collect(),
        delta_vector: delta,
        inferior_set: inferior,
        target_power: target,
        recommended_n,
    })
}
