//! Derives the generating probabilities behind the bundled presets and
//! writes them to `crates/core/presets/`.
//!
//! Run with `cargo run -p smart-mcb --example derive_eta`.
//!
//! Each preset starts from a target per-EDTR quantity (log-odds gaps below
//! the best, or response probabilities) and solves for per-sequence response
//! probabilities and per-arm stage-1 response probabilities that reproduce
//! it through the responder/non-responder weighted average. Only the
//! arithmetic here is used; nothing from the library's estimation path.
//!
//! * `design1-simulation`: gaps (0.59, 1.30, 0.67, 0.00). Best EDTR 4 at
//!   probability 0.6; stage-1 response 0.4 and responder-sequence
//!   probability 0.5 in both arms. Each arm's two EDTRs differ only in
//!   their non-responder sequence, so the gaps pin those directly.
//! * `general-simulation`: gaps (0.93, 1.93, 0.00, 1.14, 2.66, 1.94, 0.84,
//!   0.17). Within an arm the four EDTRs cross two responder and two
//!   non-responder sequences, which forces p1 + p4 = p2 + p3. Given the
//!   best logit x, the first three EDTRs of an arm follow from the gaps and
//!   the fourth from that identity; x is chosen by ternary search to minimise
//!   the worst gap error across both arms. Stage-1 response is 0.6 in both
//!   arms and the responder-sequence probability is the midpoint of the
//!   interval keeping every sequence in [0.05, 0.95].
//! * `engage`: EDTR probabilities (0.38, 0.41, 0.19, 0.22) with stage-1
//!   response 0.5 / 0.7 and responder-sequence probabilities 0.3 / 0.05.
//!   The free split was calibrated by simulation so that the power to
//!   exclude EDTRs 3 and 4 at n = 148 is close to 57%.

use std::fs;
use std::path::PathBuf;

use serde_json::json;

const DESIGN1_DELTA: [f64; 4] = [0.59, 1.30, 0.67, 0.00];
const GENERAL_DELTA: [f64; 8] = [0.93, 1.93, 0.00, 1.14, 2.66, 1.94, 0.84, 0.17];
const ENGAGE_THETA: [f64; 4] = [0.38, 0.41, 0.19, 0.22];

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Non-responder probability giving `target` for a given responder
/// probability and stage-1 response rate.
fn nonresponder(target: f64, theta_r: f64, lambda: f64) -> f64 {
    (target - theta_r * lambda) / (1.0 - lambda)
}

fn design1_simulation() -> serde_json::Value {
    let best = 0.6_f64;
    let (lambda, theta_r) = (0.4, 0.5);
    let p: Vec<f64> = DESIGN1_DELTA.iter().map(|d| expit(logit(best) - d)).collect();
    let theta_seq = vec![
        theta_r,
        nonresponder(p[0], theta_r, lambda),
        nonresponder(p[1], theta_r, lambda),
        theta_r,
        nonresponder(p[2], theta_r, lambda),
        nonresponder(p[3], theta_r, lambda),
    ];
    preset(
        "design1-simulation",
        "Six-sequence design reproducing gaps (0.59, 1.30, 0.67, 0.00)",
        "design1",
        theta_seq,
        (lambda, lambda),
        0.61,
        json!({ "delta": DESIGN1_DELTA }),
    )
}

/// EDTR probabilities of one four-EDTR arm for best logit `x`, the fourth
/// forced by the crossing identity.
fn general_arm(x: f64, gaps: &[f64]) -> [f64; 4] {
    let p0 = expit(x - gaps[0]);
    let p1 = expit(x - gaps[1]);
    let p2 = expit(x - gaps[2]);
    [p0, p1, p2, p1 + p2 - p0]
}

fn general_error(x: f64) -> f64 {
    let mut p = general_arm(x, &GENERAL_DELTA[..4]).to_vec();
    p.extend(general_arm(x, &GENERAL_DELTA[4..]));
    let best = p.iter().cloned().fold(f64::MIN, f64::max);
    p.iter()
        .zip(GENERAL_DELTA)
        .map(|(&q, d)| (logit(best) - logit(q) - d).abs())
        .fold(0.0, f64::max)
}

/// Splits an arm's EDTR probabilities (R+/NR+, R+/NR-, R-/NR+, R-/NR-) into
/// sequence probabilities ordered R+, R-, NR+, NR-.
fn general_split(p: [f64; 4], lambda: f64, eps: f64) -> [f64; 4] {
    let r_gap = (p[2] - p[0]) / lambda;
    let nr_gap = (p[1] - p[0]) / (1.0 - lambda);
    // every sequence probability is affine in the R+ probability t
    let nr_plus = |t: f64| nonresponder(p[0], t, lambda);
    let mut lo = eps;
    let mut hi = 1.0 - eps;
    lo = lo.max(eps - r_gap);
    hi = hi.min(1.0 - eps - r_gap);
    // nr_plus is decreasing in t
    let t_at = |target: f64| (p[0] - target * (1.0 - lambda)) / lambda;
    lo = lo.max(t_at(1.0 - eps)).max(t_at(1.0 - eps - nr_gap));
    hi = hi.min(t_at(eps)).min(t_at(eps - nr_gap));
    assert!(lo < hi, "no feasible split for {p:?}");
    let t = 0.5 * (lo + hi);
    [t, t + r_gap, nr_plus(t), nr_plus(t) + nr_gap]
}

fn general_simulation() -> serde_json::Value {
    let (mut lo, mut hi) = (1.0_f64, 1.6_f64);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if general_error(a) < general_error(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let x = 0.5 * (lo + hi);
    eprintln!("general: best logit {x:.6}, worst gap error {:.6}", general_error(x));
    let lambda = 0.6;
    let plus = general_split(general_arm(x, &GENERAL_DELTA[..4]), lambda, 0.05);
    let minus = general_split(general_arm(x, &GENERAL_DELTA[4..]), lambda, 0.05);
    let theta_seq: Vec<f64> = plus.iter().chain(&minus).copied().collect();
    preset(
        "general-simulation",
        "Eight-sequence design reproducing gaps (0.93, 1.93, 0.00, 1.14, 2.66, 1.94, 0.84, 0.17)",
        "general",
        theta_seq,
        (lambda, lambda),
        0.9,
        json!({ "delta": GENERAL_DELTA }),
    )
}

fn engage() -> serde_json::Value {
    let (lp, lm) = (0.5, 0.7);
    let (rp, rm) = (0.3, 0.05);
    let p = ENGAGE_THETA;
    let theta_seq = vec![
        rp,
        nonresponder(p[0], rp, lp),
        nonresponder(p[1], rp, lp),
        rm,
        nonresponder(p[2], rm, lm),
        nonresponder(p[3], rm, lm),
    ];
    preset(
        "engage",
        "ENGAGE-shaped design with EDTR probabilities (0.38, 0.41, 0.19, 0.22); exclusion of EDTRs 3 and 4",
        "design1",
        theta_seq,
        (lp, lm),
        0.5,
        json!({ "edtr_probs": ENGAGE_THETA }),
    )
}

fn preset(
    name: &str,
    description: &str,
    kind: &str,
    theta_seq: Vec<f64>,
    lambda: (f64, f64),
    delta_min: f64,
    target: serde_json::Value,
) -> serde_json::Value {
    assert!(theta_seq.iter().all(|&t| t > 0.0 && t < 1.0), "{name}: {theta_seq:?}");
    json!({
        "name": name,
        "description": description,
        "eta": {
            "design": { "kind": kind },
            "theta_seq": theta_seq,
            "lambda": { "plus": lambda.0, "minus": lambda.1 },
            "rand_prob_stage1": 0.5,
            "rand_prob_stage2": 0.5,
        },
        "delta_min": delta_min,
        "target": target,
    })
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets");
    fs::create_dir_all(&dir)?;
    for value in [design1_simulation(), general_simulation(), engage()] {
        let name = value["name"].as_str().unwrap().to_owned();
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, serde_json::to_string_pretty(&value)? + "\n")?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
