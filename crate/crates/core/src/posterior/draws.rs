use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{clamp_probability, logit, mix, posterior_lambda_with, posterior_theta_with, BetaPrior, TrialData};
use crate::design::{Arm, SmartDesign};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::{EdtrId, SequenceId};

/// Draws per RNG stream. Draw `m` always comes from stream `m / DRAW_BLOCK`
/// of the run seed, so results do not depend on the worker count.
const DRAW_BLOCK: usize = 256;

/// Which EDTR the log-odds ratios are taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// EDTR with the largest analytic posterior mean; smallest id on ties.
    #[default]
    Auto,
    Fixed(EdtrId),
}

impl std::str::FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Reference::Auto);
        }
        s.parse::<usize>()
            .ok()
            .filter(|&id| id > 0)
            .map(|id| Reference::Fixed(EdtrId(id)))
            .ok_or_else(|| Error::InvalidSpec(format!("reference must be `auto` or an EDTR id, got `{s}`")))
    }
}

/// Monte Carlo draws of EDTR response probabilities and of their log-odds
/// ratios against a reference EDTR. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawMatrix {
    draws: usize,
    theta: Vec<Vec<f64>>,
    zeta: Vec<Vec<f64>>,
    zeta_edtrs: Vec<EdtrId>,
    reference: EdtrId,
    seed: u64,
    posterior_means: Vec<f64>,
}

impl DrawMatrix {
    /// Assembles a matrix from EDTR probability columns (one per EDTR, each of
    /// length `draws`), computing the log-odds ratios against `reference`.
    pub fn from_theta(theta: Vec<Vec<f64>>, reference: EdtrId, seed: u64) -> Result<Self> {
        let draws = theta.first().map_or(0, Vec::len);
        if draws == 0 {
            return Err(Error::NoDraws);
        }
        if theta.iter().any(|c| c.len() != draws) {
            return Err(Error::InconsistentData("ragged draw columns".to_owned()));
        }
        if reference.0 == 0 || reference.0 > theta.len() {
            return Err(Error::UnknownEdtr(reference));
        }
        let theta: Vec<Vec<f64>> = theta
            .into_iter()
            .map(|c| c.into_iter().map(clamp_probability).collect())
            .collect();
        let ref_logit: Vec<f64> = theta[reference.index()].iter().map(|&p| logit(p)).collect();
        let mut zeta = Vec::with_capacity(theta.len() - 1);
        let mut zeta_edtrs = Vec::with_capacity(theta.len() - 1);
        for (i, col) in theta.iter().enumerate() {
            if i == reference.index() {
                continue;
            }
            zeta.push(col.iter().zip(&ref_logit).map(|(&p, &r)| logit(p) - r).collect());
            zeta_edtrs.push(EdtrId::from_index(i));
        }
        let posterior_means = theta.iter().map(|c| c.iter().sum::<f64>() / draws as f64).collect();
        Ok(DrawMatrix {
            draws,
            theta,
            zeta,
            zeta_edtrs,
            reference,
            seed,
            posterior_means,
        })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn num_edtrs(&self) -> usize {
        self.theta.len()
    }

    /// EDTR response-probability draws for `edtr`.
    pub fn theta(&self, edtr: EdtrId) -> &[f64] {
        &self.theta[edtr.index()]
    }

    pub fn theta_columns(&self) -> &[Vec<f64>] {
        &self.theta
    }

    /// Log-odds-ratio columns, one per non-reference EDTR, in the order of
    /// [`DrawMatrix::zeta_edtrs`].
    pub fn zeta_columns(&self) -> &[Vec<f64>] {
        &self.zeta
    }

    pub fn zeta_edtrs(&self) -> &[EdtrId] {
        &self.zeta_edtrs
    }

    /// Draws of log-odds ratio for `edtr`; `None` for the reference.
    pub fn zeta(&self, edtr: EdtrId) -> Option<&[f64]> {
        self.zeta_edtrs
            .iter()
            .position(|&e| e == edtr)
            .map(|i| self.zeta[i].as_slice())
    }

    pub fn reference(&self) -> EdtrId {
        self.reference
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Posterior means used to pick the reference: analytic when produced by
    /// [`draw_posterior`], column means for [`DrawMatrix::from_theta`].
    pub fn posterior_means(&self) -> &[f64] {
        &self.posterior_means
    }

    /// Monte Carlo mean of each EDTR's draws.
    pub fn draw_means(&self) -> Vec<f64> {
        self.theta
            .iter()
            .map(|c| c.iter().sum::<f64>() / self.draws as f64)
            .collect()
    }
}

/// Samples `draws` joint posterior draws of all EDTR response probabilities
/// under the uniform prior.
pub fn draw_posterior(
    design: &SmartDesign,
    data: &TrialData,
    draws: usize,
    seed: u64,
    reference: Reference,
) -> Result<DrawMatrix> {
    draw_posterior_with_prior(design, data, draws, seed, reference, BetaPrior::default())
}

pub fn draw_posterior_with_prior(
    design: &SmartDesign,
    data: &TrialData,
    draws: usize,
    seed: u64,
    reference: Reference,
    prior: BetaPrior,
) -> Result<DrawMatrix> {
    if draws == 0 {
        return Err(Error::NoDraws);
    }
    data.check(design)?;

    let seq_post = (0..design.num_sequences())
        .map(|i| posterior_theta_with(data, SequenceId::from_index(i), prior))
        .collect::<Result<Vec<_>>>()?;
    let lambda_post = [
        posterior_lambda_with(data, Arm::Plus, prior),
        posterior_lambda_with(data, Arm::Minus, prior),
    ];
    let arm_slot = |a: Arm| usize::from(a == Arm::Minus);

    // (responder seq index, non-responder seq index, arm slot) per EDTR
    let wiring: Vec<(usize, usize, usize)> = design
        .edtrs()
        .iter()
        .map(|e| (e.responder_seq.index(), e.nonresponder_seq.index(), arm_slot(e.arm)))
        .collect();

    let analytic_means: Vec<f64> = wiring
        .iter()
        .map(|&(r, nr, a)| mix(seq_post[r].mean(), seq_post[nr].mean(), lambda_post[a].mean()))
        .collect();
    let reference = match reference {
        Reference::Auto => best_index(&analytic_means),
        Reference::Fixed(id) => {
            design.edtr(id)?;
            id
        }
    };

    let seq_dist: Vec<_> = seq_post.iter().map(|p| p.distribution()).collect();
    let lambda_dist: Vec<_> = lambda_post.iter().map(|p| p.distribution()).collect();
    let n_edtrs = wiring.len();

    let blocks = draws.div_ceil(DRAW_BLOCK);
    let rows: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let len = DRAW_BLOCK.min(draws - b * DRAW_BLOCK);
            let mut out = Vec::with_capacity(len * n_edtrs);
            let mut seq_draw = vec![0.0; seq_dist.len()];
            for _ in 0..len {
                for (slot, dist) in seq_draw.iter_mut().zip(&seq_dist) {
                    *slot = dist.sample(&mut rng);
                }
                let lambda = [lambda_dist[0].sample(&mut rng), lambda_dist[1].sample(&mut rng)];
                out.extend(
                    wiring
                        .iter()
                        .map(|&(r, nr, a)| mix(seq_draw[r], seq_draw[nr], lambda[a])),
                );
            }
            out
        })
        .collect();

    let mut theta = vec![Vec::with_capacity(draws); n_edtrs];
    for block in &rows {
        for row in block.chunks_exact(n_edtrs) {
            for (col, &v) in theta.iter_mut().zip(row) {
                col.push(v);
            }
        }
    }
    let mut matrix = DrawMatrix::from_theta(theta, reference, seed)?;
    matrix.posterior_means = analytic_means;
    Ok(matrix)
}

/// Id of the largest value, first one on ties.
pub(crate) fn best_index(values: &[f64]) -> EdtrId {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    EdtrId::from_index(best)
}
