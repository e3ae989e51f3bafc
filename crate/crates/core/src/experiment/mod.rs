//! The object-search protocol: session construction, the trial state
//! machine, scoring and JSON Lines trial logs.

mod dataset;
mod log;
mod plan;
mod scoring;
mod state;

pub use dataset::{synth_dataset, Candidate, Dataset, SceneEntry};
pub use log::{read_log, write_log, Decision, TrialRecord};
pub use plan::{build_session, SessionPlan, StratumQuota, BREAK_AFTER, FALSE_TRIALS, QUOTAS, TRIALS_PER_SESSION};
pub use scoring::{score_trial, ArchiveScorer, Scorer, DEFAULT_TOLERANCE_PX};
pub use state::{replay_records, Event, GazeAck, Phase, SessionState, StateDelta};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskstore::ShapeClass;

/// Viewing condition of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "GCSS")]
    Gcss,
    Edges,
    Coloured,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Gcss, Condition::Edges, Condition::Coloured];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Gcss => "GCSS",
            Condition::Edges => "Edges",
            Condition::Coloured => "Coloured",
        }
    }

    /// Phosphene conditions get a rest break halfway through.
    pub fn has_break(self) -> bool {
        !matches!(self, Condition::Coloured)
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcss" => Ok(Condition::Gcss),
            "edges" => Ok(Condition::Edges),
            "coloured" | "colored" => Ok(Condition::Coloured),
            _ => Err(Error::invalid(format!("unknown condition {s:?} (expected GCSS, Edges or Coloured)"))),
        }
    }
}

/// Scene stratum by object count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClutterLevel {
    Low,
    Intermediate,
    High,
}

impl ClutterLevel {
    pub const ALL: [ClutterLevel; 3] = [ClutterLevel::Low, ClutterLevel::Intermediate, ClutterLevel::High];

    /// Low 1-3, intermediate 5-8, high 9-11 objects; other counts fall in no stratum.
    pub fn from_object_count(n: u32) -> Option<Self> {
        match n {
            1..=3 => Some(ClutterLevel::Low),
            5..=8 => Some(ClutterLevel::Intermediate),
            9..=11 => Some(ClutterLevel::High),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClutterLevel::Low => "low",
            ClutterLevel::Intermediate => "intermediate",
            ClutterLevel::High => "high",
        }
    }
}

/// Shape taxonomy of search targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetShape {
    Rectangle,
    Sphere,
    Cylinder,
}

impl TargetShape {
    pub const ALL: [TargetShape; 3] = [TargetShape::Rectangle, TargetShape::Sphere, TargetShape::Cylinder];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetShape::Rectangle => "rectangle",
            TargetShape::Sphere => "sphere",
            TargetShape::Cylinder => "cylinder",
        }
    }
}

impl TryFrom<ShapeClass> for TargetShape {
    type Error = Error;

    fn try_from(s: ShapeClass) -> Result<Self> {
        match s {
            ShapeClass::Rectangle => Ok(TargetShape::Rectangle),
            ShapeClass::Sphere => Ok(TargetShape::Sphere),
            ShapeClass::Cylinder => Ok(TargetShape::Cylinder),
            ShapeClass::Other => Err(Error::invalid("shape class `other` is not target-eligible")),
        }
    }
}

impl From<TargetShape> for ShapeClass {
    fn from(s: TargetShape) -> Self {
        match s {
            TargetShape::Rectangle => ShapeClass::Rectangle,
            TargetShape::Sphere => ShapeClass::Sphere,
            TargetShape::Cylinder => ShapeClass::Cylinder,
        }
    }
}

/// Five-way trial outcome. Wrong-location clicks and false presence claims
/// are kept apart so both accuracy definitions and both classification
/// mappings can be derived from one log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "TP")]
    TruePositive,
    #[serde(rename = "FP_location")]
    FalsePositiveLocation,
    #[serde(rename = "FP_claim")]
    FalsePositiveClaim,
    #[serde(rename = "TN")]
    TrueNegative,
    #[serde(rename = "FN")]
    FalseNegative,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::TruePositive,
        Outcome::FalsePositiveLocation,
        Outcome::FalsePositiveClaim,
        Outcome::TrueNegative,
        Outcome::FalseNegative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::TruePositive => "TP",
            Outcome::FalsePositiveLocation => "FP_location",
            Outcome::FalsePositiveClaim => "FP_claim",
            Outcome::TrueNegative => "TN",
            Outcome::FalseNegative => "FN",
        }
    }
}

/// One image-target pair as presented in a session.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrialSpec {
    pub image_id: String,
    pub target_label: String,
    pub target_present: bool,
    pub clutter_level: ClutterLevel,
    pub target_shape: TargetShape,
    pub condition: Condition,
}
