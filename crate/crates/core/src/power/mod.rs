//! Trial simulation and Monte Carlo power / sample-size determination.

mod search;
mod simulate;

pub use search::{estimate_power, sample_size_search, PowerCurve, PowerPoint, PowerSpec};
pub use simulate::{simulate_subjects, simulate_trial};

use serde::{Deserialize, Serialize};

use crate::design::{ArmValues, SmartDesign};
use crate::error::{Error, Result};
use crate::posterior::{best_index, logit, mix};
use crate::EdtrId;

/// True generating probabilities for a simulated SMART.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEta {
    pub design: SmartDesign,
    /// Response probability per sequence, in sequence-id order.
    pub theta_seq: Vec<f64>,
    /// Stage-1 response probability per arm.
    pub lambda: ArmValues<f64>,
    #[serde(default = "half")]
    pub rand_prob_stage1: f64,
    #[serde(default = "half")]
    pub rand_prob_stage2: f64,
}

fn half() -> f64 {
    0.5
}

impl TruthEta {
    pub fn new(design: SmartDesign, theta_seq: Vec<f64>, lambda: ArmValues<f64>) -> Result<Self> {
        let eta = TruthEta {
            design,
            theta_seq,
            lambda,
            rand_prob_stage1: 0.5,
            rand_prob_stage2: 0.5,
        };
        eta.validate()?;
        Ok(eta)
    }

    pub fn validate(&self) -> Result<()> {
        let violations = self.design.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidDesign(violations));
        }
        if self.theta_seq.len() != self.design.num_sequences() {
            return Err(Error::InvalidSpec(format!(
                "{} sequence probabilities for {} sequences",
                self.theta_seq.len(),
                self.design.num_sequences()
            )));
        }
        let interior = |name: &str, p: f64| {
            if p > 0.0 && p < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} = {p} is not strictly inside (0, 1)")))
            }
        };
        for (i, &p) in self.theta_seq.iter().enumerate() {
            interior(&format!("theta_seq[{}]", i + 1), p)?;
        }
        interior("lambda.plus", self.lambda.plus)?;
        interior("lambda.minus", self.lambda.minus)?;
        interior("rand_prob_stage1", self.rand_prob_stage1)?;
        interior("rand_prob_stage2", self.rand_prob_stage2)
    }
}

/// True response probability of every EDTR.
pub fn true_edtr_probs(eta: &TruthEta) -> Vec<f64> {
    eta.design
        .edtrs()
        .iter()
        .map(|e| {
            mix(
                eta.theta_seq[e.responder_seq.index()],
                eta.theta_seq[e.nonresponder_seq.index()],
                *eta.lambda.get(e.arm),
            )
        })
        .collect()
}

/// The true best EDTR (smallest id on ties).
pub fn true_best(eta: &TruthEta) -> EdtrId {
    best_index(&true_edtr_probs(eta))
}

/// Log-odds gap of each EDTR below the best: `logit(best) - logit(own)`.
/// Non-negative; zero for the best.
pub fn true_delta(eta: &TruthEta) -> Vec<f64> {
    let probs = true_edtr_probs(eta);
    let best = logit(probs[best_index(&probs).index()]);
    probs.iter().map(|&p| best - logit(p)).collect()
}

/// EDTRs whose gap reaches `delta_min`; these must be excluded for a trial
/// to count as a success.
pub fn inferior_set(delta: &[f64], delta_min: f64) -> Vec<EdtrId> {
    delta
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= delta_min)
        .map(|(i, _)| EdtrId::from_index(i))
        .collect()
}
