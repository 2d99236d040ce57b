//! Multiple comparisons with the best from Monte Carlo draws.
//!
//! Each non-reference EDTR gets a one-sided upper credible limit for its
//! log-odds ratio against the reference. The limits are order statistics of
//! the draw columns at a common rank: the `(1 - alpha)` empirical quantile
//! of the per-draw maximum column rank. Every draw whose column ranks all sit
//! at or below that critical rank lies under every limit, so at least
//! `ceil((1 - alpha) M)` draws are jointly covered.
//!
//! The set of best keeps the reference and every EDTR whose limit is
//! non-negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::DrawMatrix;
use crate::EdtrId;

/// Slack on `(1 - alpha) M` so that e.g. `0.95 * 1000` counts as 950.
const QUANTILE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McbResult {
    pub alpha: f64,
    pub critical_rank: usize,
    pub draws: usize,
    pub seed: u64,
    pub reference: EdtrId,
    /// One row per EDTR in id order.
    pub rows: Vec<McbRow>,
    pub set_of_best: Vec<EdtrId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McbRow {
    pub edtr: EdtrId,
    /// Monte Carlo posterior mean of the EDTR response probability.
    pub theta_mean: f64,
    /// `None` for the reference.
    pub upper_limit: Option<f64>,
    pub in_set: bool,
}

impl McbResult {
    pub fn upper_limit(&self, edtr: EdtrId) -> Option<f64> {
        self.rows.iter().find(|r| r.edtr == edtr).and_then(|r| r.upper_limit)
    }

    pub fn contains(&self, edtr: EdtrId) -> bool {
        self.set_of_best.contains(&edtr)
    }
}

/// Ascending ranks within each column (1 = smallest); tied values share the
/// minimum rank of their block.
pub fn column_ranks(columns: &[Vec<f64>]) -> Vec<Vec<usize>> {
    columns.iter().map(|c| min_ranks(c)).collect()
}

fn min_ranks(column: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..column.len()).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0; column.len()];
    let mut block_rank = 1;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && column[i] != column[order[pos - 1]] {
            block_rank = pos + 1;
        }
        ranks[i] = block_rank;
    }
    ranks
}

/// Smallest `r` such that at least `ceil((1 - alpha) M)` draws have every
/// column rank `<= r`.
pub fn critical_rank(ranks: &[Vec<usize>], alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    let draws = ranks.first().map_or(0, Vec::len);
    if draws == 0 {
        return Err(Error::NoDraws);
    }
    let mut row_max = vec![1usize; draws];
    for col in ranks {
        if col.len() != draws {
            return Err(Error::InconsistentData("ragged rank columns".to_owned()));
        }
        for (m, &r) in row_max.iter_mut().zip(col) {
            *m = (*m).max(r);
        }
    }
    row_max.sort_unstable();
    let target = (((1.0 - alpha) * draws as f64 - QUANTILE_SLACK).ceil() as usize).clamp(1, draws);
    Ok(row_max[target - 1])
}

/// The `critical_rank`-th smallest value of each column.
pub fn upper_limits(columns: &[Vec<f64>], critical_rank: usize) -> Result<Vec<f64>> {
    columns
        .iter()
        .map(|c| {
            if critical_rank == 0 || critical_rank > c.len() {
                return Err(Error::CriticalRankOutOfRange {
                    rank: critical_rank,
                    draws: c.len(),
                });
            }
            let mut sorted = c.clone();
            let (_, nth, _) = sorted.select_nth_unstable_by(critical_rank - 1, f64::total_cmp);
            Ok(*nth)
        })
        .collect()
}

/// Simultaneous upper limits and the set of best at level `alpha`.
pub fn set_of_best(draws: &DrawMatrix, alpha: f64) -> Result<McbResult> {
    check_alpha(alpha)?;
    let columns = draws.zeta_columns();
    let (critical, limits) = if columns.is_empty() {
        (1, Vec::new())
    } else {
        let ranks = column_ranks(columns);
        let critical = critical_rank(&ranks, alpha)?;
        (critical, upper_limits(columns, critical)?)
    };

    let reference = draws.reference();
    let means = draws.draw_means();
    let rows: Vec<McbRow> = (0..draws.num_edtrs())
        .map(|i| {
            let edtr = EdtrId::from_index(i);
            let upper_limit = draws
                .zeta_edtrs()
                .iter()
                .position(|&e| e == edtr)
                .map(|j| limits[j]);
            McbRow {
                edtr,
                theta_mean: means[i],
                upper_limit,
                in_set: upper_limit.is_none_or(|u| u >= 0.0),
            }
        })
        .collect();
    let set_of_best = rows.iter().filter(|r| r.in_set).map(|r| r.edtr).collect();
    Ok(McbResult {
        alpha,
        critical_rank: critical,
        draws: draws.draws(),
        seed: draws.seed(),
        reference,
        rows,
        set_of_best,
    })
}

/// Fraction of draws lying at or below every limit.
pub fn joint_coverage(columns: &[Vec<f64>], limits: &[f64]) -> f64 {
    let draws = columns.first().map_or(0, Vec::len);
    if draws == 0 {
        return 1.0;
    }
    let covered = (0..draws)
        .filter(|&m| columns.iter().zip(limits).all(|(c, &u)| c[m] <= u))
        .count();
    covered as f64 / draws as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}
