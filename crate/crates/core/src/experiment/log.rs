//! JSON Lines trial log: one [`TrialRecord`] per line.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClutterLevel, Condition, Outcome, TargetShape, TrialSpec};
use crate::error::{Error, Result};
use crate::maskstore::{GazePoint, SelectionPolicy};

/// Response that closes a trial: a left click at a stimulus position, or a
/// right click declaring the target absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Click { x: f64, y: f64 },
    Absent,
}

#[derive(Serialize, Deserialize)]
struct DecisionWire {
    #[serde(rename = "type")]
    kind: String,
    x: Option<f64>,
    y: Option<f64>,
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match *self {
            Decision::Click { x, y } => DecisionWire { kind: "click".into(), x: Some(x), y: Some(y) },
            Decision::Absent => DecisionWire { kind: "absent".into(), x: None, y: None },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = DecisionWire::deserialize(d)?;
        match (wire.kind.as_str(), wire.x, wire.y) {
            ("click", Some(x), Some(y)) => Ok(Decision::Click { x, y }),
            ("click", _, _) => Err(D::Error::custom("click decision needs x and y")),
            ("absent", _, _) => Ok(Decision::Absent),
            (other, _, _) => Err(D::Error::custom(format!("unknown decision type {other:?}"))),
        }
    }
}

mod gaze_triples {
    use super::*;

    pub fn serialize<S: Serializer>(trace: &[GazePoint], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(trace.iter().map(|g| (g.t, g.x, g.y)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<GazePoint>, D::Error> {
        let raw: Vec<(u64, f64, f64)> = Deserialize::deserialize(d)?;
        Ok(raw.into_iter().map(|(t, x, y)| GazePoint { x, y, t }).collect())
    }
}

/// One completed trial. Field order and names are the log's wire format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub session_id: String,
    pub condition: Condition,
    pub index: usize,
    pub image_id: String,
    pub target_label: String,
    pub target_present: bool,
    pub clutter: ClutterLevel,
    pub shape: TargetShape,
    /// Stimulus onset on the session clock.
    pub onset_ms: u64,
    pub decision: Decision,
    /// Decision time minus stimulus onset.
    pub rt_ms: u64,
    pub outcome: Outcome,
    pub policy: SelectionPolicy,
    /// Samples with `t` relative to onset, strictly increasing.
    #[serde(with = "gaze_triples")]
    pub gaze: Vec<GazePoint>,
}

impl TrialRecord {
    pub fn spec(&self) -> TrialSpec {
        TrialSpec {
            image_id: self.image_id.clone(),
            target_label: self.target_label.clone(),
            target_present: self.target_present,
            clutter_level: self.clutter,
            target_shape: self.shape,
            condition: self.condition,
        }
    }
}

/// Serializes records, one JSON object per line, each newline-terminated.
pub fn write_log(records: &[TrialRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses a log. Blank lines and metadata lines (objects carrying a
/// top-level `"metadata"` key, such as an appended questionnaire) are skipped.
pub fn read_log(text: &str) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Data(format!("log line {}: {e}", n + 1)))?;
        if value.get("metadata").is_some() {
            continue;
        }
        let rec = serde_json::from_value(value).map_err(|e| Error::Data(format!("log line {}: {e}", n + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
