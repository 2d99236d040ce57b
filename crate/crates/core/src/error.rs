use crate::design::{Arm, Violation};
use crate::EdtrId;
use crate::SequenceId;

/// Errors raised by the analysis, simulation and power routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no sequence for a1={a1}, s={}, a2={}", u8::from(*.responder), fmt_stage2(.stage2))]
    NoSuchSequence {
        a1: Arm,
        responder: bool,
        stage2: Option<Arm>,
    },

    #[error("invalid design: {}", join(.0))]
    InvalidDesign(Vec<Violation>),

    #[error("unknown design kind `{0}` (expected design1, general or custom)")]
    UnknownDesignKind(String),

    #[error("unknown sequence id {0}")]
    UnknownSequence(SequenceId),

    #[error("unknown EDTR id {0}")]
    UnknownEdtr(EdtrId),

    #[error("data does not match design: {0}")]
    InconsistentData(String),

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),

    #[error("at least one draw is required")]
    NoDraws,

    #[error("critical rank {rank} outside 1..={draws}")]
    CriticalRankOutOfRange { rank: usize, draws: usize },

    #[error("invalid power specification: {0}")]
    InvalidSpec(String),

    #[error("inferior set contains the best EDTR {0}; delta_min must be positive")]
    InferiorSetContainsBest(EdtrId),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn fmt_stage2(stage2: &Option<Arm>) -> String {
    match stage2 {
        Some(a) => a.to_string(),
        None => "none".to_owned(),
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
