use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::TruthEta;
use crate::design::{Arm, SmartDesign};
use crate::error::Result;
use crate::posterior::{Subject, TrialData};
use crate::rng::stream_rng;

/// Simulates `n` subjects: stage-1 arm, stage-1 response, stage-2
/// re-randomization where the design offers a choice, then the final
/// binary outcome of the realized sequence.
pub fn simulate_subjects(eta: &TruthEta, n: usize, seed: u64) -> Result<Vec<Subject>> {
    let mut out = Vec::with_capacity(n);
    run(eta, n, seed, |s| out.push(s))?;
    Ok(out)
}

/// Aggregated counts of [`simulate_subjects`] for the same seed.
pub fn simulate_trial(eta: &TruthEta, n: usize, seed: u64) -> Result<TrialData> {
    let mut data = TrialData::empty(&eta.design);
    let mut err = None;
    run(eta, n, seed, |s| {
        if err.is_none() {
            if let Err(e) = data.record(&eta.design, &s) {
                err = Some(e);
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(data),
    }
}

fn run(eta: &TruthEta, n: usize, seed: u64, mut emit: impl FnMut(Subject)) -> Result<()> {
    eta.validate()?;
    let plan = Stage2Plan::new(&eta.design);
    let mut rng = stream_rng(seed, 0);
    for _ in 0..n {
        let a1 = if rng.random_bool(eta.rand_prob_stage1) {
            Arm::Plus
        } else {
            Arm::Minus
        };
        let responder = rng.random_bool(*eta.lambda.get(a1));
        let a2 = plan.assign(a1, responder, eta.rand_prob_stage2, &mut rng);
        let seq = eta.design.sequence_of(a1, responder, a2)?;
        let outcome = rng.random_bool(eta.theta_seq[seq.index()]);
        emit(Subject {
            a1,
            responder,
            a2,
            outcome,
        });
    }
    Ok(())
}

/// Stage-2 options per (arm, response) group.
struct Stage2Plan {
    // indexed [arm slot][responder as usize]
    options: [[Vec<Option<Arm>>; 2]; 2],
}

impl Stage2Plan {
    fn new(design: &SmartDesign) -> Self {
        let group = |arm, responder| design.stage2_options(arm, responder);
        Stage2Plan {
            options: [
                [group(Arm::Plus, false), group(Arm::Plus, true)],
                [group(Arm::Minus, false), group(Arm::Minus, true)],
            ],
        }
    }

    fn assign(&self, a1: Arm, responder: bool, p_plus: f64, rng: &mut ChaCha8Rng) -> Option<Arm> {
        let opts = &self.options[usize::from(a1 == Arm::Minus)][usize::from(responder)];
        match opts.as_slice() {
            [only] => *only,
            _ => Some(if rng.random_bool(p_plus) { Arm::Plus } else { Arm::Minus }),
        }
    }
}
