//! Sufficient statistics of a SMART with a binary outcome, plus ingestion
//! from subject-level CSV and aggregated-count JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::design::{Arm, ArmValues, SmartDesign};
use crate::error::{Error, Result};
use crate::SequenceId;

/// One subject's realized history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subject {
    pub a1: Arm,
    pub responder: bool,
    pub a2: Option<Arm>,
    pub outcome: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SequenceCounts {
    pub successes: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArmCounts {
    pub responders: u64,
    pub enrolled: u64,
}

/// Per-sequence outcome counts and per-arm stage-1 response counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialData {
    sequences: Vec<SequenceCounts>,
    arms: ArmValues<ArmCounts>,
}

impl TrialData {
    /// All-zero counts shaped for `design`.
    pub fn empty(design: &SmartDesign) -> Self {
        TrialData {
            sequences: vec![SequenceCounts::default(); design.num_sequences()],
            arms: ArmValues::default(),
        }
    }

    /// Builds from raw counts and checks them against `design`.
    pub fn from_counts(
        design: &SmartDesign,
        sequences: Vec<SequenceCounts>,
        arms: ArmValues<ArmCounts>,
    ) -> Result<Self> {
        let data = TrialData { sequences, arms };
        data.check(design)?;
        Ok(data)
    }

    pub fn from_subjects<'a>(
        design: &SmartDesign,
        subjects: impl IntoIterator<Item = &'a Subject>,
    ) -> Result<Self> {
        let mut data = TrialData::empty(design);
        for s in subjects {
            data.record(design, s)?;
        }
        Ok(data)
    }

    pub fn record(&mut self, design: &SmartDesign, subject: &Subject) -> Result<SequenceId> {
        let id = design.sequence_of(subject.a1, subject.responder, subject.a2)?;
        let cell = &mut self.sequences[id.index()];
        cell.total += 1;
        cell.successes += u64::from(subject.outcome);
        let arm = self.arms.get_mut(subject.a1);
        arm.enrolled += 1;
        arm.responders += u64::from(subject.responder);
        Ok(id)
    }

    pub fn sequences(&self) -> &[SequenceCounts] {
        &self.sequences
    }

    pub fn arms(&self) -> &ArmValues<ArmCounts> {
        &self.arms
    }

    pub fn sequence(&self, id: SequenceId) -> Result<SequenceCounts> {
        id.0.checked_sub(1)
            .and_then(|i| self.sequences.get(i))
            .copied()
            .ok_or(Error::UnknownSequence(id))
    }

    pub fn arm(&self, arm: Arm) -> ArmCounts {
        *self.arms.get(arm)
    }

    pub fn total_subjects(&self) -> u64 {
        self.arms.plus.enrolled + self.arms.minus.enrolled
    }

    /// Sequences with no subjects; their posterior is the prior.
    pub fn empty_sequences(&self) -> Vec<SequenceId> {
        self.sequences
            .iter()
            .enumerate()
            .filter(|(_, c)| c.total == 0)
            .map(|(i, _)| SequenceId::from_index(i))
            .collect()
    }

    /// Verifies the count invariants and their agreement with `design`:
    /// successes never exceed totals, responders never exceed enrolment, the
    /// sequences of an arm add up to its enrolment and its responder
    /// sequences add up to its responders.
    pub fn check(&self, design: &SmartDesign) -> Result<()> {
        if self.sequences.len() != design.num_sequences() {
            return Err(Error::InconsistentData(format!(
                "{} sequence cells for a design with {} sequences",
                self.sequences.len(),
                design.num_sequences()
            )));
        }
        for (i, c) in self.sequences.iter().enumerate() {
            if c.successes > c.total {
                return Err(Error::InconsistentData(format!(
                    "sequence {}: {} successes out of {}",
                    i + 1,
                    c.successes,
                    c.total
                )));
            }
        }
        for arm in Arm::BOTH {
            let a = self.arms.get(arm);
            if a.responders > a.enrolled {
                return Err(Error::InconsistentData(format!(
                    "arm {arm}: {} responders out of {}",
                    a.responders, a.enrolled
                )));
            }
            let (mut total, mut responders) = (0, 0);
            for s in design.sequences().iter().filter(|s| s.arm == arm) {
                let n = self.sequences[s.id.index()].total;
                total += n;
                if s.responder {
                    responders += n;
                }
            }
            if total != a.enrolled {
                return Err(Error::InconsistentData(format!(
                    "arm {arm}: sequences hold {total} subjects but {} enrolled",
                    a.enrolled
                )));
            }
            if responders != a.responders {
                return Err(Error::InconsistentData(format!(
                    "arm {arm}: responder sequences hold {responders} subjects but {} responders",
                    a.responders
                )));
            }
        }
        Ok(())
    }

    /// Reads subject-level rows with header `a1,s,a2,y`. `a2` is empty when
    /// no stage-2 treatment was randomized. Errors carry the 1-based line.
    pub fn from_csv<R: Read>(design: &SmartDesign, reader: R) -> Result<Self> {
        let mut data = TrialData::empty(design);
        for (line, subject) in read_subjects(reader)? {
            data.record(design, &subject).map_err(|e| Error::Csv {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(data)
    }

    pub fn to_counts_file(&self) -> CountsFile {
        CountsFile {
            sequences: self
                .sequences
                .iter()
                .enumerate()
                .map(|(i, c)| SequenceCountsEntry {
                    id: SequenceId::from_index(i),
                    successes: c.successes,
                    total: c.total,
                })
                .collect(),
            arms: Arm::BOTH
                .into_iter()
                .map(|arm| ArmCountsEntry {
                    arm,
                    responders: self.arms.get(arm).responders,
                    enrolled: self.arms.get(arm).enrolled,
                })
                .collect(),
        }
    }

    pub fn from_counts_file(design: &SmartDesign, file: &CountsFile) -> Result<Self> {
        let mut sequences = vec![None; design.num_sequences()];
        for e in &file.sequences {
            let slot = e
                .id
                .0
                .checked_sub(1)
                .and_then(|i| sequences.get_mut(i))
                .ok_or(Error::UnknownSequence(e.id))?;
            if slot.is_some() {
                return Err(Error::InconsistentData(format!("sequence {} listed twice", e.id)));
            }
            *slot = Some(SequenceCounts {
                successes: e.successes,
                total: e.total,
            });
        }
        let sequences = sequences
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| Error::InconsistentData(format!("sequence {} missing", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut arms: ArmValues<Option<ArmCounts>> = ArmValues::default();
        for e in &file.arms {
            let slot = arms.get_mut(e.arm);
            if slot.is_some() {
                return Err(Error::InconsistentData(format!("arm {} listed twice", e.arm)));
            }
            *slot = Some(ArmCounts {
                responders: e.responders,
                enrolled: e.enrolled,
            });
        }
        let missing = |arm: Arm| Error::InconsistentData(format!("arm {arm} missing"));
        let arms = ArmValues::new(
            arms.plus.ok_or_else(|| missing(Arm::Plus))?,
            arms.minus.ok_or_else(|| missing(Arm::Minus))?,
        );
        TrialData::from_counts(design, sequences, arms)
    }
}

/// Aggregated counts keyed by sequence id and arm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFile {
    pub sequences: Vec<SequenceCountsEntry>,
    pub arms: Vec<ArmCountsEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceCountsEntry {
    pub id: SequenceId,
    pub successes: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmCountsEntry {
    pub arm: Arm,
    pub responders: u64,
    pub enrolled: u64,
}

const CSV_COLUMNS: [&str; 4] = ["a1", "s", "a2", "y"];

/// Parses subject rows, returning each with its 1-based file line.
pub fn read_subjects<R: Read>(reader: R) -> Result<Vec<(u64, Subject)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut cols = [0usize; 4];
    for (slot, name) in cols.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Csv {
                line: 1,
                message: format!("missing column `{name}` in header"),
            })?;
    }

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(cols[i]).unwrap_or("");
        let bad = |what: &str, value: &str| Error::Csv {
            line,
            message: format!("invalid {what} `{value}`"),
        };
        let a1 = parse_arm(field(0)).ok_or_else(|| bad("a1", field(0)))?;
        let responder = parse_flag(field(1)).ok_or_else(|| bad("s", field(1)))?;
        let a2 = match field(2) {
            "" => None,
            v => Some(parse_arm(v).ok_or_else(|| bad("a2", v))?),
        };
        let outcome = parse_flag(field(3)).ok_or_else(|| bad("y", field(3)))?;
        out.push((
            line,
            Subject {
                a1,
                responder,
                a2,
                outcome,
            },
        ));
    }
    Ok(out)
}

fn parse_arm(s: &str) -> Option<Arm> {
    let s = s.strip_prefix('+').unwrap_or(s);
    s.parse::<i64>().ok().and_then(Arm::from_code)
}

fn parse_flag(s: &str) -> Option<bool> {
    match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

/// Writes subject rows in the format [`read_subjects`] accepts. An empty
/// slice produces a header-only file.
pub fn write_subjects<W: Write>(writer: W, subjects: &[Subject]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for s in subjects {
        let a2 = s.a2.map(|a| a.code().to_string()).unwrap_or_default();
        w.write_record([
            s.a1.code().to_string(),
            u8::from(s.responder).to_string(),
            a2,
            u8::from(s.outcome).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subj(a1: i64, s: bool, a2: Option<i64>, y: bool) -> Subject {
        Subject {
            a1: Arm::from_code(a1).unwrap(),
            responder: s,
            a2: a2.and_then(Arm::from_code),
            outcome: y,
        }
    }

    #[test]
    fn aggregation_counts() {
        let d = SmartDesign::design1();
        let subjects = [
            subj(1, true, None, true),
            subj(1, false, Some(1), false),
            subj(1, false, Some(1), true),
            subj(-1, false, Some(-1), true),
        ];
        let data = TrialData::from_subjects(&d, &subjects).unwrap();
        assert_eq!(data.sequence(SequenceId(1)).unwrap(), SequenceCounts { successes: 1, total: 1 });
        assert_eq!(data.sequence(SequenceId(2)).unwrap(), SequenceCounts { successes: 1, total: 2 });
        assert_eq!(data.sequence(SequenceId(6)).unwrap(), SequenceCounts { successes: 1, total: 1 });
        assert_eq!(data.arm(Arm::Plus), ArmCounts { responders: 1, enrolled: 3 });
        assert_eq!(data.arm(Arm::Minus), ArmCounts { responders: 0, enrolled: 1 });
        data.check(&d).unwrap();
        assert_eq!(data.empty_sequences().len(), 3);
    }

    #[test]
    fn csv_parses_and_reports_lines() {
        let d = SmartDesign::design1();
        let text = "a1,s,a2,y\n1,1,,1\n-1,0,-1,0\n+1,0,1,1\n";
        let data = TrialData::from_csv(&d, text.as_bytes()).unwrap();
        assert_eq!(data.total_subjects(), 3);

        let bad = "a1,s,a2,y\n1,1,,1\n1,1,1,0\n";
        match TrialData::from_csv(&d, bad.as_bytes()) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad = "a1,s,a2,y\n1,1,,1\n1,1,,1\n2,0,1,0\n";
        match TrialData::from_csv(&d, bad.as_bytes()) {
            Err(Error::Csv { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("a1"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let missing = "a1,s,y\n1,1,1\n";
        assert!(matches!(
            TrialData::from_csv(&d, missing.as_bytes()),
            Err(Error::Csv { line: 1, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let d = SmartDesign::general();
        let subjects = vec![
            subj(1, true, Some(-1), true),
            subj(-1, false, Some(1), false),
            subj(-1, true, Some(1), true),
        ];
        let mut buf = Vec::new();
        write_subjects(&mut buf, &subjects).unwrap();
        let back: Vec<_> = read_subjects(buf.as_slice()).unwrap().into_iter().map(|(_, s)| s).collect();
        assert_eq!(back, subjects);
        let counts = TrialData::from_subjects(&d, &subjects).unwrap();
        assert_eq!(counts.total_subjects(), 3);

        let mut empty = Vec::new();
        write_subjects(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "a1,s,a2,y\n");
    }

    #[test]
    fn inconsistent_counts_rejected() {
        let d = SmartDesign::design1();
        let mut seqs = vec![SequenceCounts::default(); 6];
        seqs[0] = SequenceCounts { successes: 3, total: 2 };
        let arms = ArmValues::new(ArmCounts { responders: 2, enrolled: 2 }, ArmCounts::default());
        assert!(TrialData::from_counts(&d, seqs.clone(), arms).is_err());

        seqs[0] = SequenceCounts { successes: 1, total: 2 };
        assert!(TrialData::from_counts(&d, seqs.clone(), arms).is_ok());
        let wrong = ArmValues::new(ArmCounts { responders: 1, enrolled: 2 }, ArmCounts::default());
        assert!(TrialData::from_counts(&d, seqs, wrong).is_err());
    }

    #[test]
    fn counts_file_round_trip() {
        let d = SmartDesign::design1();
        let data = TrialData::from_subjects(&d, &[subj(1, true, None, true), subj(-1, false, Some(1), false)]).unwrap();
        let text = serde_json::to_string(&data.to_counts_file()).unwrap();
        let file: CountsFile = serde_json::from_str(&text).unwrap();
        assert_eq!(TrialData::from_counts_file(&d, &file).unwrap(), data);
    }
}
