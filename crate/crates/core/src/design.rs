//! Topology of a two-stage SMART.
//!
//! A design lists its treatment sequences (one per realized path
//! arm x response status x stage-2 treatment) and its embedded DTRs, each of
//! which pairs one responder sequence with one non-responder sequence of the
//! same stage-1 arm. Sequence and EDTR ids are 1-based and contiguous, so
//! `SequenceId(k)` lives at index `k - 1`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stage-1 treatment indicator, coded -1 / +1. Stage-2 indicators use the
/// same coding and the same type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Arm {
    Minus,
    Plus,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Plus, Arm::Minus];

    pub fn code(self) -> i8 {
        match self {
            Arm::Plus => 1,
            Arm::Minus => -1,
        }
    }

    pub fn from_code(code: i64) -> Option<Arm> {
        match code {
            1 => Some(Arm::Plus),
            -1 => Some(Arm::Minus),
            _ => None,
        }
    }
}

impl TryFrom<i8> for Arm {
    type Error = String;

    fn try_from(code: i8) -> std::result::Result<Self, Self::Error> {
        Arm::from_code(code.into()).ok_or_else(|| format!("treatment code must be -1 or 1, got {code}"))
    }
}

impl From<Arm> for i8 {
    fn from(arm: Arm) -> i8 {
        arm.code()
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.code())
    }
}

/// A value per stage-1 arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArmValues<T> {
    pub plus: T,
    pub minus: T,
}

impl<T> ArmValues<T> {
    pub fn new(plus: T, minus: T) -> Self {
        ArmValues { plus, minus }
    }

    pub fn get(&self, arm: Arm) -> &T {
        match arm {
            Arm::Plus => &self.plus,
            Arm::Minus => &self.minus,
        }
    }

    pub fn get_mut(&mut self, arm: Arm) -> &mut T {
        match arm {
            Arm::Plus => &mut self.plus,
            Arm::Minus => &mut self.minus,
        }
    }
}

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            /// Zero-based position.
            pub fn index(self) -> usize {
                self.0 - 1
            }

            pub fn from_index(index: usize) -> Self {
                $name(index + 1)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_type!(SequenceId);
id_type!(EdtrId);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreatmentSequence {
    pub id: SequenceId,
    pub arm: Arm,
    pub responder: bool,
    /// `None` when the design does not re-randomize this group at stage 2.
    pub stage2: Option<Arm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedDtr {
    pub id: EdtrId,
    pub arm: Arm,
    pub responder_seq: SequenceId,
    pub nonresponder_seq: SequenceId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    /// Six sequences, four EDTRs; responders continue their stage-1 treatment.
    Design1,
    /// Eight sequences, eight EDTRs; responders and non-responders both re-randomized.
    General,
    Custom,
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignKind::Design1 => "design1",
            DesignKind::General => "general",
            DesignKind::Custom => "custom",
        })
    }
}

impl std::str::FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "design1" | "design-1" | "engage" => Ok(DesignKind::Design1),
            "general" => Ok(DesignKind::General),
            "custom" => Ok(DesignKind::Custom),
            _ => Err(Error::UnknownDesignKind(s.to_owned())),
        }
    }
}

/// A violated design invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SequenceIdsNotContiguous,
    EdtrIdsNotContiguous,
    DuplicateSequence { first: SequenceId, second: SequenceId },
    DanglingSequenceReference { edtr: EdtrId, seq: SequenceId },
    ResponderSlotMismatch { edtr: EdtrId, seq: SequenceId },
    NonresponderSlotMismatch { edtr: EdtrId, seq: SequenceId },
    ArmMismatch { edtr: EdtrId, seq: SequenceId },
    DuplicateEdtr { first: EdtrId, second: EdtrId },
    UnreferencedNonresponder(SequenceId),
    MissingGroup { arm: Arm, responder: bool },
    AmbiguousStage2 { arm: Arm, responder: bool },
    TooFewEdtrs(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = |r: &bool| if *r { "responders" } else { "non-responders" };
        match self {
            Violation::SequenceIdsNotContiguous => write!(f, "sequence ids must be 1..K in order"),
            Violation::EdtrIdsNotContiguous => write!(f, "EDTR ids must be 1..L in order"),
            Violation::DuplicateSequence { first, second } => {
                write!(f, "duplicate sequence: {second} repeats (arm, s, a2) of {first}")
            }
            Violation::DanglingSequenceReference { edtr, seq } => {
                write!(f, "dangling sequence reference: EDTR {edtr} names missing sequence {seq}")
            }
            Violation::ResponderSlotMismatch { edtr, seq } => {
                write!(f, "EDTR {edtr}: responder slot holds non-responder sequence {seq}")
            }
            Violation::NonresponderSlotMismatch { edtr, seq } => {
                write!(f, "EDTR {edtr}: non-responder slot holds responder sequence {seq}")
            }
            Violation::ArmMismatch { edtr, seq } => {
                write!(f, "EDTR {edtr}: sequence {seq} belongs to the other arm")
            }
            Violation::DuplicateEdtr { first, second } => {
                write!(f, "duplicate EDTR: {second} repeats the sequence pair of {first}")
            }
            Violation::UnreferencedNonresponder(seq) => {
                write!(f, "non-responder sequence {seq} is not part of any EDTR")
            }
            Violation::MissingGroup { arm, responder } => {
                write!(f, "arm {arm} has no sequence for {}", status(responder))
            }
            Violation::AmbiguousStage2 { arm, responder } => write!(
                f,
                "arm {arm}: {} mix re-randomized and non-re-randomized sequences",
                status(responder)
            ),
            Violation::TooFewEdtrs(n) => write!(f, "at least two EDTRs are required, found {n}"),
        }
    }
}

/// Immutable SMART topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmartDesign {
    kind: DesignKind,
    sequences: Vec<TreatmentSequence>,
    edtrs: Vec<EmbeddedDtr>,
    lookup: HashMap<(Arm, bool, Option<Arm>), SequenceId>,
}

impl SmartDesign {
    /// Builds and validates a design.
    pub fn new(
        kind: DesignKind,
        sequences: Vec<TreatmentSequence>,
        edtrs: Vec<EmbeddedDtr>,
    ) -> Result<Self> {
        let design = Self::new_unchecked(kind, sequences, edtrs);
        let violations = design.validate();
        if violations.is_empty() {
            Ok(design)
        } else {
            Err(Error::InvalidDesign(violations))
        }
    }

    /// Builds a design without checking it; [`SmartDesign::validate`] reports
    /// what is wrong with it.
    pub fn new_unchecked(
        kind: DesignKind,
        sequences: Vec<TreatmentSequence>,
        edtrs: Vec<EmbeddedDtr>,
    ) -> Self {
        let mut lookup = HashMap::new();
        for s in &sequences {
            lookup.entry((s.arm, s.responder, s.stage2)).or_insert(s.id);
        }
        SmartDesign {
            kind,
            sequences,
            edtrs,
            lookup,
        }
    }

    pub fn builtin(kind: DesignKind) -> Result<Self> {
        match kind {
            DesignKind::Design1 => Ok(Self::design1()),
            DesignKind::General => Ok(Self::general()),
            DesignKind::Custom => Err(Error::UnknownDesignKind(
                "custom designs need explicit sequences and edtrs".to_owned(),
            )),
        }
    }

    /// ENGAGE-shaped design: per arm one responder sequence (no
    /// re-randomization) and two non-responder sequences.
    ///
    /// | seq | a1 | s | a2 |      | EDTR | sequences |
    /// |-----|----|---|----|------|------|-----------|
    /// | 1   | +1 | 1 | -  |      | 1    | 1, 2      |
    /// | 2   | +1 | 0 | +1 |      | 2    | 1, 3      |
    /// | 3   | +1 | 0 | -1 |      | 3    | 4, 5      |
    /// | 4   | -1 | 1 | -  |      | 4    | 4, 6      |
    /// | 5   | -1 | 0 | +1 |      |      |           |
    /// | 6   | -1 | 0 | -1 |      |      |           |
    pub fn design1() -> Self {
        let mut sequences = Vec::with_capacity(6);
        let mut edtrs = Vec::with_capacity(4);
        for arm in Arm::BOTH {
            let r = push_seq(&mut sequences, arm, true, None);
            for a2 in [Arm::Plus, Arm::Minus] {
                let nr = push_seq(&mut sequences, arm, false, Some(a2));
                push_edtr(&mut edtrs, arm, r, nr);
            }
        }
        Self::new_unchecked(DesignKind::Design1, sequences, edtrs)
    }

    /// Fully re-randomized design: per arm two responder and two
    /// non-responder sequences, crossed into four EDTRs. Sequences are
    /// ordered (R,+1), (R,-1), (NR,+1), (NR,-1) within arm +1 and then arm -1;
    /// EDTRs iterate the responder option slowest.
    pub fn general() -> Self {
        let mut sequences = Vec::with_capacity(8);
        let mut edtrs = Vec::with_capacity(8);
        for arm in Arm::BOTH {
            let r: Vec<_> = [Arm::Plus, Arm::Minus]
                .into_iter()
                .map(|a2| push_seq(&mut sequences, arm, true, Some(a2)))
                .collect();
            let nr: Vec<_> = [Arm::Plus, Arm::Minus]
                .into_iter()
                .map(|a2| push_seq(&mut sequences, arm, false, Some(a2)))
                .collect();
            for &rs in &r {
                for &ns in &nr {
                    push_edtr(&mut edtrs, arm, rs, ns);
                }
            }
        }
        Self::new_unchecked(DesignKind::General, sequences, edtrs)
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn sequences(&self) -> &[TreatmentSequence] {
        &self.sequences
    }

    pub fn edtrs(&self) -> &[EmbeddedDtr] {
        &self.edtrs
    }

    pub fn num_sequences(&self) -> usize {
        self.sequences.len()
    }

    pub fn num_edtrs(&self) -> usize {
        self.edtrs.len()
    }

    pub fn sequence(&self, id: SequenceId) -> Result<&TreatmentSequence> {
        id.0.checked_sub(1)
            .and_then(|i| self.sequences.get(i))
            .ok_or(Error::UnknownSequence(id))
    }

    pub fn edtr(&self, id: EdtrId) -> Result<&EmbeddedDtr> {
        id.0.checked_sub(1)
            .and_then(|i| self.edtrs.get(i))
            .ok_or(Error::UnknownEdtr(id))
    }

    /// The sequence a subject with history `(a1, s, a2)` followed.
    pub fn sequence_of(&self, a1: Arm, responder: bool, a2: Option<Arm>) -> Result<SequenceId> {
        self.lookup
            .get(&(a1, responder, a2))
            .copied()
            .ok_or(Error::NoSuchSequence {
                a1,
                responder,
                stage2: a2,
            })
    }

    /// Stage-2 options offered to the `(arm, responder)` group, in sequence order.
    pub fn stage2_options(&self, arm: Arm, responder: bool) -> Vec<Option<Arm>> {
        self.sequences
            .iter()
            .filter(|s| s.arm == arm && s.responder == responder)
            .map(|s| s.stage2)
            .collect()
    }

    /// Every violated invariant; empty iff the design is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        if self.sequences.iter().enumerate().any(|(i, s)| s.id.0 != i + 1) {
            out.push(Violation::SequenceIdsNotContiguous);
        }
        if self.edtrs.iter().enumerate().any(|(i, e)| e.id.0 != i + 1) {
            out.push(Violation::EdtrIdsNotContiguous);
        }

        let mut seen: HashMap<(Arm, bool, Option<Arm>), SequenceId> = HashMap::new();
        for s in &self.sequences {
            if let Some(&first) = seen.get(&(s.arm, s.responder, s.stage2)) {
                out.push(Violation::DuplicateSequence { first, second: s.id });
            } else {
                seen.insert((s.arm, s.responder, s.stage2), s.id);
            }
        }

        for arm in Arm::BOTH {
            for responder in [true, false] {
                let options = self.stage2_options(arm, responder);
                if options.is_empty() {
                    out.push(Violation::MissingGroup { arm, responder });
                } else if options.iter().any(Option::is_none) && options.len() > 1 {
                    out.push(Violation::AmbiguousStage2 { arm, responder });
                }
            }
        }

        if self.edtrs.len() < 2 {
            out.push(Violation::TooFewEdtrs(self.edtrs.len()));
        }

        let find = |id: SequenceId| self.sequences.iter().find(|s| s.id == id);
        let mut pairs: HashMap<(SequenceId, SequenceId), EdtrId> = HashMap::new();
        let mut referenced = BTreeSet::new();
        for e in &self.edtrs {
            for (seq, want_responder) in [(e.responder_seq, true), (e.nonresponder_seq, false)] {
                match find(seq) {
                    None => out.push(Violation::DanglingSequenceReference { edtr: e.id, seq }),
                    Some(s) => {
                        referenced.insert(seq);
                        if s.responder != want_responder {
                            out.push(if want_responder {
                                Violation::ResponderSlotMismatch { edtr: e.id, seq }
                            } else {
                                Violation::NonresponderSlotMismatch { edtr: e.id, seq }
                            });
                        }
                        if s.arm != e.arm {
                            out.push(Violation::ArmMismatch { edtr: e.id, seq });
                        }
                    }
                }
            }
            let key = (e.responder_seq, e.nonresponder_seq);
            if let Some(&first) = pairs.get(&key) {
                out.push(Violation::DuplicateEdtr { first, second: e.id });
            } else {
                pairs.insert(key, e.id);
            }
        }

        for s in self.sequences.iter().filter(|s| !s.responder) {
            if !referenced.contains(&s.id) {
                out.push(Violation::UnreferencedNonresponder(s.id));
            }
        }
        out
    }
}

fn push_seq(
    sequences: &mut Vec<TreatmentSequence>,
    arm: Arm,
    responder: bool,
    stage2: Option<Arm>,
) -> SequenceId {
    let id = SequenceId::from_index(sequences.len());
    sequences.push(TreatmentSequence {
        id,
        arm,
        responder,
        stage2,
    });
    id
}

fn push_edtr(edtrs: &mut Vec<EmbeddedDtr>, arm: Arm, r: SequenceId, nr: SequenceId) {
    edtrs.push(EmbeddedDtr {
        id: EdtrId::from_index(edtrs.len()),
        arm,
        responder_seq: r,
        nonresponder_seq: nr,
    });
}

/// On-disk design description.
///
/// Built-in kinds may omit `sequences` and `edtrs`; when present they must
/// match the built-in layout exactly. Custom designs must list both.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub kind: DesignKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<TreatmentSequence>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edtrs: Option<Vec<EmbeddedDtr>>,
}

impl From<&SmartDesign> for DesignFile {
    fn from(design: &SmartDesign) -> Self {
        DesignFile {
            kind: design.kind,
            sequences: Some(design.sequences.clone()),
            edtrs: Some(design.edtrs.clone()),
        }
    }
}

impl TryFrom<DesignFile> for SmartDesign {
    type Error = Error;

    fn try_from(file: DesignFile) -> Result<Self> {
        match (file.kind, file.sequences, file.edtrs) {
            (DesignKind::Custom, Some(seqs), Some(edtrs)) => {
                SmartDesign::new(DesignKind::Custom, seqs, edtrs)
            }
            (DesignKind::Custom, _, _) => Err(Error::UnknownDesignKind(
                "custom designs need explicit sequences and edtrs".to_owned(),
            )),
            (kind, seqs, edtrs) => {
                let builtin = SmartDesign::builtin(kind)?;
                let seq_ok = seqs.is_none_or(|s| s == builtin.sequences);
                let edtr_ok = edtrs.is_none_or(|e| e == builtin.edtrs);
                if seq_ok && edtr_ok {
                    Ok(builtin)
                } else {
                    Err(Error::UnknownDesignKind(format!(
                        "{kind} layout differs from the built-in; use kind \"custom\""
                    )))
                }
            }
        }
    }
}

impl Serialize for SmartDesign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DesignFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SmartDesign {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = DesignFile::deserialize(deserializer)?;
        SmartDesign::try_from(file).map_err(serde::de::Error::custom)
    }
}

impl SmartDesign {
    /// Resolves a command-line design reference: a built-in kind name or a
    /// path to a JSON design file.
    pub fn from_reference(reference: &str) -> Result<Self> {
        match reference.parse::<DesignKind>() {
            Ok(kind) => SmartDesign::builtin(kind),
            Err(_) => {
                let text = std::fs::read_to_string(reference)?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}
