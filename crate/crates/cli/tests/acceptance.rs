//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

use smart_mcb::mcb::{column_ranks, critical_rank, joint_coverage, set_of_best, upper_limits};
use smart_mcb::posterior::{draw_posterior, logit, DrawMatrix, Reference};
use smart_mcb::power::{
    estimate_power, sample_size_search, simulate_trial, true_best, true_delta, true_edtr_probs,
    PowerSpec,
};
use smart_mcb::presets::{self, Preset};
use smart_mcb::rng::{stream_rng, substream};
use smart_mcb::EdtrId;

const DESIGN1_DELTA: [f64; 4] = [0.59, 1.30, 0.67, 0.00];
const GENERAL_DELTA: [f64; 8] = [0.93, 1.93, 0.00, 1.14, 2.66, 1.94, 0.84, 0.17];
const ENGAGE_THETA: [f64; 4] = [0.38, 0.41, 0.19, 0.22];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 mcb oracle equivalence", oracle_equivalence),
        ("2a in-sample simultaneous coverage", in_sample_coverage),
        ("2b frequentist calibration", calibration),
        ("3 estimation bias and sd", estimation_quality),
        ("4 power-curve shape", power_curve_shape),
        ("5 eta reconstruction", eta_reconstruction),
        ("6 sizing at n=148", engage_sizing),
        ("7 vacuous power", vacuous_power),
        ("8 determinism across --threads", thread_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}

// Criterion 1 ---------------------------------------------------------------

/// Critical rank by enumerating every candidate rank, with `(1 - alpha) M`
/// computed in exact integer arithmetic for `alpha = percent / 100`.
fn oracle_critical_rank(columns: &[Vec<f64>], percent: usize) -> usize {
    let draws = columns[0].len();
    let needed = ((100 - percent) * draws).div_ceil(100).max(1);
    let rank = |col: &[f64], m: usize| 1 + col.iter().filter(|&&x| x < col[m]).count();
    (1..=draws)
        .find(|&r| {
            (0..draws)
                .filter(|&m| columns.iter().all(|c| rank(c, m) <= r))
                .count()
                >= needed
        })
        .expect("r = M always qualifies")
}

/// Smallest column value with at least `r` values at or below it.
fn oracle_order_statistic(column: &[f64], r: usize) -> f64 {
    column
        .iter()
        .copied()
        .filter(|&v| column.iter().filter(|&&x| x <= v).count() >= r)
        .fold(f64::INFINITY, f64::min)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(20_240_601, 0);
    let cases = 1000;
    for case in 0..cases {
        let draws = rng.random_range(1..=8);
        let num_columns = rng.random_range(1..=3);
        // coarse values force ties
        let coarse = rng.random_bool(0.5);
        let columns: Vec<Vec<f64>> = (0..num_columns)
            .map(|_| {
                (0..draws)
                    .map(|_| {
                        if coarse {
                            rng.random_range(-2..=2) as f64
                        } else {
                            rng.random_range(-3.0..3.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let percent = rng.random_range(1..=99);
        let alpha = percent as f64 / 100.0;
        let cr = critical_rank(&column_ranks(&columns), alpha).map_err(|e| e.to_string())?;
        let expected = oracle_critical_rank(&columns, percent);
        if cr != expected {
            return Err(format!("case {case}: critical rank {cr} vs oracle {expected} for {columns:?}, alpha {alpha}"));
        }
        let limits = upper_limits(&columns, cr).map_err(|e| e.to_string())?;
        for (c, &u) in columns.iter().zip(&limits) {
            let o = oracle_order_statistic(c, cr);
            if u != o {
                return Err(format!("case {case}: limit {u} vs oracle {o}"));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(10),
        format!("{cases} cases matched exactly in {:.2}s (limit 10s)", elapsed.as_secs_f64()),
    )
}

// Criterion 2 ---------------------------------------------------------------

fn in_sample_coverage() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    let columns = (1usize..=60, 1usize..=7).prop_flat_map(|(draws, cols)| {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![(-3i32..=3).prop_map(f64::from), -5.0..5.0f64], draws),
            cols,
        )
    });
    runner
        .run(&(columns, 0.001..0.999f64), |(columns, alpha)| {
            let cr = critical_rank(&column_ranks(&columns), alpha).unwrap();
            let limits = upper_limits(&columns, cr).unwrap();
            prop_assert!(joint_coverage(&columns, &limits) >= 1.0 - alpha - 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    // posterior matrices from simulated trials of both designs
    let mut rng = stream_rng(77, 0);
    let scenarios = [presets::design1_simulation(), presets::general_simulation(), presets::engage()];
    let mut worst = f64::INFINITY;
    for i in 0..300u64 {
        let p = &scenarios[(i % 3) as usize];
        let n = rng.random_range(0..400);
        let draws = rng.random_range(1..=400);
        let alpha = [0.01, 0.05, 0.1, 0.2, 0.5][(i % 5) as usize];
        let data = simulate_trial(&p.eta, n, i).map_err(|e| e.to_string())?;
        let m = draw_posterior(&p.eta.design, &data, draws, i, Reference::Auto).map_err(|e| e.to_string())?;
        let mcb = set_of_best(&m, alpha).map_err(|e| e.to_string())?;
        let limits: Vec<f64> = m.zeta_edtrs().iter().map(|&e| mcb.upper_limit(e).unwrap()).collect();
        let coverage = joint_coverage(m.zeta_columns(), &limits);
        if coverage < 1.0 - alpha - 1e-12 {
            return Err(format!("posterior matrix {i}: coverage {coverage} below {}", 1.0 - alpha));
        }
        worst = worst.min(coverage - (1.0 - alpha));
    }
    Ok(format!(
        "1000 generated matrices and 300 posterior matrices; min coverage margin {worst:.4}"
    ))
}

fn calibration() -> Outcome {
    let p = presets::design1_simulation();
    let eta = &p.eta;
    let best = true_best(eta);
    let truth: Vec<f64> = true_edtr_probs(eta).iter().map(|&t| logit(t)).collect();
    let (reps, n, draws, alpha) = (500u64, 200, 1000, 0.05);
    let mut covered = 0;
    for r in 0..reps {
        let ds = substream(2024, &[r]);
        let data = simulate_trial(eta, n, substream(ds, &[0])).map_err(|e| e.to_string())?;
        let m = draw_posterior(&eta.design, &data, draws, substream(ds, &[1]), Reference::Fixed(best))
            .map_err(|e| e.to_string())?;
        let mcb = set_of_best(&m, alpha).map_err(|e| e.to_string())?;
        let hit = m.zeta_edtrs().iter().all(|&l| {
            let zeta = truth[l.index()] - truth[best.index()];
            zeta <= mcb.upper_limit(l).unwrap()
        });
        covered += usize::from(hit);
    }
    let coverage = covered as f64 / reps as f64;
    let threshold = 0.95 - 3.0 * (0.05f64 * 0.95 / reps as f64).sqrt();
    check(
        coverage >= threshold,
        format!("true-zeta coverage {coverage:.3} over {reps} trials (threshold {threshold:.3}, reference EDTR {best})"),
    )
}

// Criterion 3 ---------------------------------------------------------------

fn estimation_quality() -> Outcome {
    let p = presets::design1_simulation();
    let eta = &p.eta;
    let truth = true_edtr_probs(eta);
    let (reps, n) = (1000u64, 400);
    let estimates = (0..reps)
        .map(|r| {
            let data = simulate_trial(eta, n, substream(3, &[r]))?;
            let m = draw_posterior(&eta.design, &data, 1, r, Reference::Auto)?;
            Ok(m.posterior_means().to_vec())
        })
        .collect::<smart_mcb::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (l, &t) in truth.iter().enumerate() {
        let vals: Vec<f64> = estimates.iter().map(|e| e[l]).collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        let bias = mean - t;
        ok &= bias.abs() <= 0.01 && (0.03..=0.05).contains(&sd);
        parts.push(format!("EDTR {}: bias {bias:+.4} sd {sd:.4}", l + 1));
    }
    check(ok, parts.join("; "))
}

// Criterion 4 ---------------------------------------------------------------

fn desk_spec(p: &Preset, grid: Vec<usize>, seed: u64) -> PowerSpec {
    PowerSpec {
        eta: p.eta.clone(),
        alpha: 0.05,
        gamma: 0.2,
        delta_min: p.delta_min,
        grid,
        datasets_per_n: PowerSpec::DESK_DATASETS,
        draws_per_dataset: PowerSpec::DESK_DRAWS,
        seed,
    }
}

fn power_curve_shape() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, seed) in [(presets::design1_simulation(), 41), (presets::general_simulation(), 42)] {
        let spec = desk_spec(&p, (150..=500).step_by(50).collect(), seed);
        let curve = sample_size_search(&spec).map_err(|e| e.to_string())?;
        let pts = &curve.points;
        let monotone = pts.iter().enumerate().all(|(i, a)| {
            pts[i + 1..]
                .iter()
                .all(|b| b.power >= a.power - 3.0 * (a.se * a.se + b.se * b.se).sqrt())
        });
        let crosses = pts.first().is_some_and(|a| a.power < 0.8) && pts.last().is_some_and(|b| b.power >= 0.8);
        ok &= monotone && crosses;
        let powers: Vec<String> = pts.iter().map(|q| format!("{}:{:.2}", q.n, q.power)).collect();
        parts.push(format!(
            "{} (delta_min {}): [{}] monotone={monotone} crosses_0.80={crosses} n80={:?}",
            p.name,
            p.delta_min,
            powers.join(" "),
            curve.recommended_n
        ));
    }
    check(ok, parts.join(" | "))
}

// Criterion 5 ---------------------------------------------------------------

fn eta_reconstruction() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, target) in [
        (presets::design1_simulation(), &DESIGN1_DELTA[..]),
        (presets::general_simulation(), &GENERAL_DELTA[..]),
    ] {
        let delta = true_delta(&p.eta);
        let err = delta.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ok &= delta.len() == target.len() && err <= 0.01;
        parts.push(format!("{}: max |delta error| {err:.4}", p.name));
    }
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples/derive_eta.rs");
    ok &= script.is_file();
    parts.push(format!("derivation script present: {}", script.is_file()));
    check(ok, parts.join("; "))
}

// Criterion 6 ---------------------------------------------------------------

fn engage_sizing() -> Outcome {
    let p = presets::engage();
    let probs = true_edtr_probs(&p.eta);
    let theta_err = probs.iter().zip(ENGAGE_THETA).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut spec = desk_spec(&p, vec![148], 6);
    spec.datasets_per_n = PowerSpec::DEFAULT_DATASETS;
    spec.draws_per_dataset = PowerSpec::DEFAULT_DRAWS;
    let at_148 = estimate_power(&spec, 148).map_err(|e| e.to_string())?;

    // reported only
    let mut curve_spec = desk_spec(&p, (150..=500).step_by(25).collect(), 60);
    curve_spec.gamma = 0.1;
    let curve = sample_size_search(&curve_spec).map_err(|e| e.to_string())?;
    let first = |target: f64| curve.points.iter().find(|q| q.power >= target).map(|q| q.n);
    let inferior: Vec<String> = spec
        .inferior_set()
        .map_err(|e| e.to_string())?
        .iter()
        .map(ToString::to_string)
        .collect();

    check(
        theta_err < 1e-9 && (at_148.power - 0.57).abs() <= 0.07,
        format!(
            "power(148) = {:.3} +/- {:.3} (target 0.57 +/- 0.07); EDTR probs {probs:.3?}, delta_min {}, inferior set {{{}}}; reported only: n80 {:?} (250 +/- 40), n90 {:?} (350 +/- 50)",
            at_148.power,
            at_148.se,
            p.delta_min,
            inferior.join(", "),
            first(0.8),
            first(0.9)
        ),
    )
}

// Criterion 7 ---------------------------------------------------------------

fn vacuous_power() -> Outcome {
    for p in [presets::design1_simulation(), presets::general_simulation(), presets::engage()] {
        let max_delta = true_delta(&p.eta).into_iter().fold(0.0, f64::max);
        for seed in [0u64, 1, 99, u64::MAX] {
            let mut spec = desk_spec(&p, vec![1, 10, 148, 500], seed);
            spec.delta_min = max_delta + 1e-6;
            let curve = sample_size_search(&spec).map_err(|e| e.to_string())?;
            if !curve.inferior_set.is_empty() || curve.points.iter().any(|q| q.power != 1.0) {
                return Err(format!("{} seed {seed}: {:?}", p.name, curve.points));
            }
        }
    }
    Ok("power exactly 1.0 for every preset, seed and n".to_owned())
}

// Criterion 8 ---------------------------------------------------------------

fn run_cli(threads: usize, args: &[&str], out: &std::path::Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_smartmcb"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn thread_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name);
    let data = p("trial.csv");
    let data_str = data.to_str().unwrap().to_owned();
    std::fs::write(
        p("power.json"),
        r#"{"preset": "design1-simulation", "grid": {"start": 100, "stop": 300, "step": 100}, "datasets_per_n": 60, "draws_per_dataset": 300, "seed": 8}"#,
    )
    .map_err(|e| e.to_string())?;
    let cfg = p("power.json").to_str().unwrap().to_owned();

    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("simulate", vec!["simulate", "--design", "general", "--eta", "general-simulation", "--n", "500", "--seed", "5"]),
        ("analyze json", vec!["analyze", "--design", "general", "--data", &data_str, "--draws", "4000", "--seed", "6"]),
        ("analyze csv", vec!["analyze", "--design", "general", "--data", &data_str, "--draws", "4000", "--seed", "6", "--format", "csv"]),
        ("power", vec!["power", "--config", &cfg]),
        ("samplesize", vec!["samplesize", "--config", &cfg, "--seed", "9"]),
    ];
    let mut compared = Vec::new();
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for threads in [1, 4] {
            let target = if *name == "simulate" { data.clone() } else { p(&format!("{threads}.out")) };
            outputs.push(run_cli(threads, args, &target)?);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Err(format!("{name}: outputs differ between 1 and 4 threads"));
        }
        compared.push(format!("{name} ({} bytes)", outputs[0].len()));
    }

    // library entry points too
    let eta = presets::general_simulation().eta;
    let trial = simulate_trial(&eta, 300, 12).map_err(|e| e.to_string())?;
    let draw = |threads: usize| -> Result<DrawMatrix, String> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| draw_posterior(&eta.design, &trial, 3000, 13, Reference::Fixed(EdtrId(3))))
            .map_err(|e| e.to_string())
    };
    check(
        draw(1)? == draw(3)?,
        format!("byte-identical for {}; draw matrices equal for 1 and 3 threads", compared.join(", ")),
    )
}
