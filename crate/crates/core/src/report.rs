//! Plot-ready outputs. Every report carries the parameters needed to
//! regenerate it.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::design::{DesignKind, SmartDesign};
use crate::error::{Error, Result};
use crate::mcb::{set_of_best, McbResult};
use crate::posterior::{draw_posterior, CountsFile, Reference, TrialData};
use crate::power::{sample_size_search, PowerCurve, PowerPoint, PowerSpec, TruthEta};
use crate::{EdtrId, SequenceId};

/// An upper limit, or the `"ref"` marker for the reference EDTR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Ref,
    Value(f64),
}

impl Serialize for Limit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Limit::Ref => s.serialize_str("ref"),
            Limit::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Limit::Ref => f.write_str("ref"),
            Limit::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdtrReportRow {
    pub id: EdtrId,
    /// Monte Carlo mean of the draws.
    pub theta_mean: f64,
    /// Analytic posterior mean.
    pub posterior_mean: f64,
    pub upper_limit: Limit,
    pub in_set: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub command: &'static str,
    pub design_kind: DesignKind,
    pub design: SmartDesign,
    pub alpha: f64,
    pub draws: usize,
    pub seed: u64,
    pub reference_rule: Reference,
    pub reference: EdtrId,
    pub critical_rank: usize,
    pub edtrs: Vec<EdtrReportRow>,
    pub set_of_best: Vec<EdtrId>,
    pub counts: CountsFile,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub mcb: McbResult,
}

/// Posterior draws and set of best for observed trial data.
pub fn analyze(
    design: &SmartDesign,
    data: &TrialData,
    alpha: f64,
    draws: usize,
    seed: u64,
    reference: Reference,
) -> Result<AnalysisReport> {
    let matrix = draw_posterior(design, data, draws, seed, reference)?;
    let mcb = set_of_best(&matrix, alpha)?;
    let warnings = data
        .empty_sequences()
        .into_iter()
        .map(|k: SequenceId| format!("sequence {k} has no subjects; its posterior is the Beta(1, 1) prior"))
        .collect();
    let edtrs = mcb
        .rows
        .iter()
        .map(|r| EdtrReportRow {
            id: r.edtr,
            theta_mean: r.theta_mean,
            posterior_mean: matrix.posterior_means()[r.edtr.index()],
            upper_limit: r.upper_limit.map_or(Limit::Ref, Limit::Value),
            in_set: r.in_set,
        })
        .collect();
    Ok(AnalysisReport {
        command: "analyze",
        design_kind: design.kind(),
        design: design.clone(),
        alpha,
        draws,
        seed,
        reference_rule: reference,
        reference: mcb.reference,
        critical_rank: mcb.critical_rank,
        edtrs,
        set_of_best: mcb.set_of_best.clone(),
        counts: data.to_counts_file(),
        warnings,
        mcb,
    })
}

impl AnalysisReport {
    /// One row per EDTR: `id,theta_mean,posterior_mean,upper_limit,in_set`,
    /// preceded by `#`-comment lines with the run parameters.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# design={} alpha={} draws={} seed={} reference={} critical_rank={}",
            self.design_kind, self.alpha, self.draws, self.seed, self.reference, self.critical_rank
        )?;
        writeln!(w, "id,theta_mean,posterior_mean,upper_limit,in_set")?;
        for r in &self.edtrs {
            writeln!(w, "{},{},{},{},{}", r.id, r.theta_mean, r.posterior_mean, r.upper_limit, r.in_set)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub command: &'static str,
    pub design_kind: DesignKind,
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub delta_min: f64,
    pub datasets_per_n: usize,
    pub draws_per_dataset: usize,
    pub grid: Vec<usize>,
    pub eta: TruthEta,
    pub true_edtr_probs: Vec<f64>,
    pub best: EdtrId,
    pub delta_vector: Vec<f64>,
    pub zeta_true: Vec<f64>,
    pub inferior_set: Vec<EdtrId>,
    pub target_power: f64,
    pub recommended_n: Option<usize>,
    pub curve: Vec<PowerPoint>,
}

pub fn power_study(spec: &PowerSpec, command: &'static str) -> Result<PowerReport> {
    let curve = sample_size_search(spec)?;
    Ok(PowerReport::new(spec, curve, command))
}

impl PowerReport {
    pub fn new(spec: &PowerSpec, curve: PowerCurve, command: &'static str) -> Self {
        PowerReport {
            command,
            design_kind: spec.eta.design.kind(),
            seed: spec.seed,
            alpha: spec.alpha,
            gamma: spec.gamma,
            delta_min: spec.delta_min,
            datasets_per_n: spec.datasets_per_n,
            draws_per_dataset: spec.draws_per_dataset,
            grid: spec.grid.clone(),
            eta: spec.eta.clone(),
            true_edtr_probs: crate::power::true_edtr_probs(&spec.eta),
            best: curve.best,
            delta_vector: curve.delta_vector,
            zeta_true: curve.zeta_true,
            inferior_set: curve.inferior_set,
            target_power: curve.target_power,
            recommended_n: curve.recommended_n,
            curve: curve.points,
        }
    }

    /// `n,power,se,recommended` with `#`-comment parameter lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let ids = |v: &[EdtrId]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        writeln!(
            w,
            "# design={} seed={} alpha={} gamma={} delta_min={} datasets_per_n={} draws_per_dataset={}",
            self.design_kind,
            self.seed,
            self.alpha,
            self.gamma,
            self.delta_min,
            self.datasets_per_n,
            self.draws_per_dataset
        )?;
        writeln!(
            w,
            "# delta={} inferior_set={}",
            self.delta_vector.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(" "),
            ids(&self.inferior_set)
        )?;
        writeln!(w, "n,power,se,recommended")?;
        for p in &self.curve {
            writeln!(w, "{},{},{},{}", p.n, p.power, p.se, Some(p.n) == self.recommended_n)?;
        }
        Ok(())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(Error::from)
}
