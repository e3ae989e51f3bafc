use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stats::{mean, sem};
use crate::error::{Error, Result};
use crate::experiment::{Condition, Outcome, TrialRecord};

/// How wrong-location clicks on true trials enter the binary report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FpMapping {
    /// A wrong-location click is a failure to find: it counts as FN.
    #[default]
    ClaimOnly,
    /// A wrong-location click is both a false positive for the true class and
    /// a miss.
    StrictLocation,
}

impl FpMapping {
    pub const ALL: [FpMapping; 2] = [FpMapping::ClaimOnly, FpMapping::StrictLocation];

    pub fn as_str(self) -> &'static str {
        match self {
            FpMapping::ClaimOnly => "claim-only",
            FpMapping::StrictLocation => "strict-location",
        }
    }
}

impl fmt::Display for FpMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FpMapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "claim-only" => Ok(FpMapping::ClaimOnly),
            "strict-location" => Ok(FpMapping::StrictLocation),
            _ => Err(Error::invalid(format!("unknown fp mapping {s:?}"))),
        }
    }
}

/// Raw five-way tally of a log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub tp: u64,
    pub fp_location: u64,
    pub fp_claim: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl OutcomeCounts {
    pub fn tally<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut c = Self::default();
        for r in records {
            c.add(r.outcome);
        }
        c
    }

    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::TruePositive => self.tp += 1,
            Outcome::FalsePositiveLocation => self.fp_location += 1,
            Outcome::FalsePositiveClaim => self.fp_claim += 1,
            Outcome::TrueNegative => self.tn += 1,
            Outcome::FalseNegative => self.fn_ += 1,
        }
    }

    pub fn true_trials(&self) -> u64 {
        self.tp + self.fp_location + self.fn_
    }

    pub fn false_trials(&self) -> u64 {
        self.tn + self.fp_claim
    }

    pub fn total(&self) -> u64 {
        self.true_trials() + self.false_trials()
    }

    pub fn confusion(&self, mapping: FpMapping) -> ConfusionCounts {
        match mapping {
            FpMapping::ClaimOnly => ConfusionCounts {
                tp: self.tp,
                fp: self.fp_claim,
                tn: self.tn,
                fn_: self.fn_ + self.fp_location,
                fp_location: 0,
            },
            FpMapping::StrictLocation => ConfusionCounts {
                tp: self.tp,
                fp: self.fp_claim + self.fp_location,
                tn: self.tn,
                fn_: self.fn_,
                fp_location: self.fp_location,
            },
        }
    }
}

/// Binary confusion counts. `fp` includes `fp_location`, the share of false
/// positives that happened on true trials (zero under claim-only).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp_location: u64,
}

impl ConfusionCounts {
    pub fn true_support(&self) -> u64 {
        self.tp + self.fn_ + self.fp_location
    }

    pub fn false_support(&self) -> u64 {
        self.tn + self.fp - self.fp_location
    }
}

fn nonempty(records: &[TrialRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::UndefinedMetric("no trials".into()));
    }
    Ok(())
}

/// TP over true trials.
pub fn accuracy_true(records: &[TrialRecord]) -> Result<f64> {
    nonempty(records)?;
    let c = OutcomeCounts::tally(records);
    if c.true_trials() == 0 {
        return Err(Error::UndefinedMetric("no true trials".into()));
    }
    Ok(c.tp as f64 / c.true_trials() as f64)
}

/// (TP + TN) over all trials.
pub fn accuracy_all(records: &[TrialRecord]) -> Result<f64> {
    nonempty(records)?;
    let c = OutcomeCounts::tally(records);
    Ok((c.tp + c.tn) as f64 / c.total() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when some ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Two-class report with rows for false (target absent) and true trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub mapping: FpMapping,
    pub counts: ConfusionCounts,
    pub false_trials: ClassMetrics,
    pub true_trials: ClassMetrics,
    pub accuracy: f64,
    pub macro_avg: AverageMetrics,
    pub weighted_avg: AverageMetrics,
    pub total: u64,
}

fn ratio(num: u64, den: u64, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(hit: u64, predicted: u64, support: u64) -> ClassMetrics {
    let mut degenerate = false;
    let precision = ratio(hit, predicted, &mut degenerate);
    let recall = ratio(hit, support, &mut degenerate);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        degenerate = true;
        0.0
    };
    ClassMetrics { precision, recall, f1, support, degenerate }
}

pub fn classification_report(records: &[TrialRecord], mapping: FpMapping) -> Result<ClassificationReport> {
    nonempty(records)?;
    Ok(report_from_counts(OutcomeCounts::tally(records).confusion(mapping), mapping))
}

/// Builds the report from binary counts; `counts.total` must be nonzero for
/// meaningful averages.
pub fn report_from_counts(c: ConfusionCounts, mapping: FpMapping) -> ClassificationReport {
    let true_support = c.true_support();
    let false_support = c.false_support();
    let true_trials = class_metrics(c.tp, c.tp + c.fp, true_support);
    let false_trials = class_metrics(c.tn, c.tn + c.fn_, false_support);
    let total = true_support + false_support;
    let mut unused = false;
    let accuracy = ratio(c.tp + c.tn, total, &mut unused);
    let macro_avg = AverageMetrics {
        precision: (false_trials.precision + true_trials.precision) / 2.0,
        recall: (false_trials.recall + true_trials.recall) / 2.0,
        f1: (false_trials.f1 + true_trials.f1) / 2.0,
    };
    let w = |f: fn(&ClassMetrics) -> f64| {
        if total == 0 {
            0.0
        } else {
            (f(&false_trials) * false_support as f64 + f(&true_trials) * true_support as f64) / total as f64
        }
    };
    let weighted_avg = AverageMetrics { precision: w(|m| m.precision), recall: w(|m| m.recall), f1: w(|m| m.f1) };
    ClassificationReport { mapping, counts: c, false_trials, true_trials, accuracy, macro_avg, weighted_avg, total }
}

/// Grouping variable for [`breakdown`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakdownKey {
    Clutter,
    Shape,
    Condition,
}

impl FromStr for BreakdownKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clutter" => Ok(BreakdownKey::Clutter),
            "shape" => Ok(BreakdownKey::Shape),
            "condition" => Ok(BreakdownKey::Condition),
            _ => Err(Error::invalid(format!("unknown breakdown key {s:?}"))),
        }
    }
}

impl BreakdownKey {
    /// Sort rank and name of the record's group.
    fn group(self, r: &TrialRecord) -> (usize, &'static str) {
        match self {
            BreakdownKey::Clutter => (r.clutter as usize, r.clutter.as_str()),
            BreakdownKey::Shape => (r.shape as usize, r.shape.as_str()),
            BreakdownKey::Condition => (r.condition as usize, r.condition.as_str()),
        }
    }
}

/// Accuracy of one (condition, group) cell. Pooled values count every trial
/// once; participant values average per-session accuracies, with SEM from the
/// sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub condition: Condition,
    pub group: String,
    pub trials: u64,
    pub true_trials: u64,
    pub accuracy_true: Option<f64>,
    pub accuracy_all: f64,
    pub participants: usize,
    pub participant_mean_true: Option<f64>,
    pub sem_true: Option<f64>,
    pub participant_mean_all: f64,
    pub sem_all: Option<f64>,
}

/// Splits records by condition and `key`, in enum order. Sessions stand in
/// for participants.
pub fn breakdown(records: &[TrialRecord], key: BreakdownKey) -> Vec<GroupRow> {
    type Cell<'a> = BTreeMap<&'a str, OutcomeCounts>;
    let mut cells: BTreeMap<(Condition, (usize, &'static str)), Cell<'_>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.condition, key.group(r)))
            .or_default()
            .entry(r.session_id.as_str())
            .or_default()
            .add(r.outcome);
    }
    let rows: Vec<GroupRow> = cells
        .into_iter()
        .map(|((condition, (_, group)), sessions)| {
            let mut pooled = OutcomeCounts::default();
            let mut per_true = Vec::new();
            let mut per_all = Vec::new();
            for c in sessions.values() {
                pooled.tp += c.tp;
                pooled.fp_location += c.fp_location;
                pooled.fp_claim += c.fp_claim;
                pooled.tn += c.tn;
                pooled.fn_ += c.fn_;
                if c.true_trials() > 0 {
                    per_true.push(c.tp as f64 / c.true_trials() as f64);
                }
                per_all.push((c.tp + c.tn) as f64 / c.total() as f64);
            }
            GroupRow {
                condition,
                group: group.to_owned(),
                trials: pooled.total(),
                true_trials: pooled.true_trials(),
                accuracy_true: (pooled.true_trials() > 0).then(|| pooled.tp as f64 / pooled.true_trials() as f64),
                accuracy_all: (pooled.tp + pooled.tn) as f64 / pooled.total() as f64,
                participants: sessions.len(),
                participant_mean_true: (!per_true.is_empty()).then(|| mean(&per_true)),
                sem_true: sem(&per_true),
                participant_mean_all: mean(&per_all),
                sem_all: sem(&per_all),
            }
        })
        .collect();
    for row in &rows {
        if row.true_trials == 0 {
            log::warn!("{} / {}: no true trials; true-trial accuracy omitted", row.condition, row.group);
        }
    }
    rows
}
