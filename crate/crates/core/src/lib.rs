//! Bayesian multiple comparisons with the best for two-stage sequential
//! multiple-assignment randomized trials (SMARTs) with a binary outcome.
//!
//! * [`design`]: trial topology, treatment sequences and embedded DTRs.
//! * [`posterior`]: conjugate Beta posteriors and joint Monte Carlo draws of
//!   EDTR response probabilities and log-odds ratios.
//! * [`mcb`]: rank-based simultaneous upper credible limits and the set of
//!   best EDTRs.
//! * [`power`]: trial simulation, Monte Carlo power and sample-size search.
//! * [`config`], [`presets`], [`report`]: file formats and reports used by
//!   the `smartmcb` command-line tool.
//!
//! ```
//! use smart_mcb::{design::SmartDesign, posterior::{draw_posterior, Reference}, mcb::set_of_best, presets};
//! use smart_mcb::power::simulate_trial;
//!
//! let eta = presets::engage().eta;
//! let data = simulate_trial(&eta, 148, 7).unwrap();
//! let draws = draw_posterior(&eta.design, &data, 1000, 7, Reference::Auto).unwrap();
//! let result = set_of_best(&draws, 0.05).unwrap();
//! assert!(result.set_of_best.contains(&result.reference));
//! ```

pub mod config;
pub mod design;
pub mod error;
pub mod mcb;
pub mod posterior;
pub mod power;
pub mod presets;
pub mod report;
pub mod rng;

pub use design::{Arm, ArmValues, DesignKind, EdtrId, SequenceId, SmartDesign};
pub use error::{Error, Result};
pub use mcb::McbResult;
pub use posterior::{DrawMatrix, Reference, TrialData};
pub use power::{PowerCurve, PowerSpec, TruthEta};
