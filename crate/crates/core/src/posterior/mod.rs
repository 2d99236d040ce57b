//! Conjugate Bayesian engine.
//!
//! Every sequence response probability and every stage-1 response
//! probability gets an independent Beta posterior. EDTR response
//! probabilities are the response-weighted average of their responder and
//! non-responder sequence probabilities, applied draw by draw.

mod data;
mod draws;

pub use data::{
    read_subjects, write_subjects, ArmCounts, ArmCountsEntry, CountsFile, SequenceCounts,
    SequenceCountsEntry, Subject, TrialData,
};
pub use draws::{draw_posterior, draw_posterior_with_prior, DrawMatrix, Reference};
pub(crate) use draws::best_index;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::design::Arm;
use crate::error::{Error, Result};
use crate::SequenceId;

/// Lower/upper guard applied to probabilities before taking logits.
pub const PROB_EPSILON: f64 = 1e-12;

/// Beta prior hyperparameters shared by every sequence and arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaPrior {
    /// The uniform prior.
    fn default() -> Self {
        BetaPrior { alpha: 1.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPosterior {
    pub fn from_counts(successes: u64, trials: u64, prior: BetaPrior) -> Self {
        BetaPosterior {
            alpha: successes as f64 + prior.alpha,
            beta: (trials - successes) as f64 + prior.beta,
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn distribution(&self) -> rand_distr::Beta<f64> {
        rand_distr::Beta::new(self.alpha, self.beta).expect("beta shapes are positive and finite")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.distribution().sample(rng)
    }
}

/// Posterior of sequence `k`'s response probability under the uniform prior.
pub fn posterior_theta(data: &TrialData, k: SequenceId) -> Result<BetaPosterior> {
    posterior_theta_with(data, k, BetaPrior::default())
}

pub fn posterior_theta_with(data: &TrialData, k: SequenceId, prior: BetaPrior) -> Result<BetaPosterior> {
    let c = data.sequence(k)?;
    Ok(BetaPosterior::from_counts(c.successes, c.total, prior))
}

/// Posterior of arm `a`'s stage-1 response probability under the uniform prior.
pub fn posterior_lambda(data: &TrialData, a: Arm) -> BetaPosterior {
    posterior_lambda_with(data, a, BetaPrior::default())
}

pub fn posterior_lambda_with(data: &TrialData, a: Arm, prior: BetaPrior) -> BetaPosterior {
    let c = data.arm(a);
    BetaPosterior::from_counts(c.responders, c.enrolled, prior)
}

/// G-computation: `theta_r * lambda + theta_nr * (1 - lambda)`.
pub fn compute_edtr_prob(theta_r: f64, theta_nr: f64, lambda: f64) -> Result<f64> {
    for p in [theta_r, theta_nr, lambda] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
    }
    Ok(mix(theta_r, theta_nr, lambda))
}

#[inline]
pub(crate) fn mix(theta_r: f64, theta_nr: f64, lambda: f64) -> f64 {
    theta_r * lambda + theta_nr * (1.0 - lambda)
}

/// Clamps into `[PROB_EPSILON, 1 - PROB_EPSILON]`.
#[inline]
pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
