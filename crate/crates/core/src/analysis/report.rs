use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gaze::{gaze_entropy, gaze_map, GazeMap, DEFAULT_GRID};
use super::metrics::{breakdown, classification_report, BreakdownKey, ClassificationReport, FpMapping, GroupRow, OutcomeCounts};
use super::stats::{mean, trial_time_stats, TrialTimeStats};
use crate::error::{Error, Result};
use crate::experiment::{Condition, TrialRecord};
use crate::maskstore::GazePoint;

/// Stimulus geometry that gaze coordinates refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub frame_width: u32,
    pub frame_height: u32,
    pub grid_size: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { frame_width: 1024, frame_height: 1024, grid_size: DEFAULT_GRID }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub counts: OutcomeCounts,
    pub accuracy_true: Option<f64>,
    pub accuracy_all: f64,
    /// One report per false-positive mapping.
    pub classification: Vec<ClassificationReport>,
    pub trial_time: TrialTimeStats,
    /// Mean per-trial entropy over trials that recorded gaze.
    pub mean_gaze_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub condition: Condition,
    pub trials: u64,
    pub accuracy_true: Option<f64>,
    pub accuracy_all: f64,
    pub mean_rt_s: f64,
    pub mean_gaze_entropy: Option<f64>,
}

/// Everything `analyze` derives from a set of logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub options: ReportOptions,
    pub trials: usize,
    pub conditions: Vec<ConditionSummary>,
    pub sessions: Vec<SessionSummary>,
    pub clutter: Vec<GroupRow>,
    pub shape: Vec<GroupRow>,
}

fn accuracies(c: &OutcomeCounts) -> (Option<f64>, f64) {
    let t = (c.true_trials() > 0).then(|| c.tp as f64 / c.true_trials() as f64);
    (t, (c.tp + c.tn) as f64 / c.total() as f64)
}

fn mean_entropy(records: &[&TrialRecord], opts: &ReportOptions) -> Result<Option<f64>> {
    let mut hs = Vec::new();
    for r in records.iter().filter(|r| !r.gaze.is_empty()) {
        hs.push(gaze_entropy(&r.gaze, opts.frame_width, opts.frame_height, opts.grid_size)?.entropy_bits);
    }
    Ok((!hs.is_empty()).then(|| mean(&hs)))
}

pub fn analyze(records: &[TrialRecord], opts: &ReportOptions) -> Result<AnalysisReport> {
    if records.is_empty() {
        return Err(Error::UndefinedMetric("no trials to analyze".into()));
    }
    let mut by_condition: BTreeMap<Condition, Vec<&TrialRecord>> = BTreeMap::new();
    let mut by_session: BTreeMap<(&str, Condition), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_condition.entry(r.condition).or_default().push(r);
        by_session.entry((r.session_id.as_str(), r.condition)).or_default().push(r);
    }
    let times = trial_time_stats(records);

    let mut conditions = Vec::new();
    for (condition, recs) in &by_condition {
        let owned: Vec<TrialRecord> = recs.iter().map(|r| (*r).clone()).collect();
        let counts = OutcomeCounts::tally(recs.iter().copied());
        let (accuracy_true, accuracy_all) = accuracies(&counts);
        conditions.push(ConditionSummary {
            condition: *condition,
            counts,
            accuracy_true,
            accuracy_all,
            classification: FpMapping::ALL
                .iter()
                .map(|&m| classification_report(&owned, m))
                .collect::<Result<_>>()?,
            trial_time: *times.iter().find(|t| t.condition == *condition).expect("every condition has times"),
            mean_gaze_entropy: mean_entropy(recs, opts)?,
        });
    }

    let mut sessions = Vec::new();
    for ((session_id, condition), recs) in &by_session {
        let counts = OutcomeCounts::tally(recs.iter().copied());
        let (accuracy_true, accuracy_all) = accuracies(&counts);
        let rts: Vec<f64> = recs.iter().map(|r| r.rt_ms as f64 / 1000.0).collect();
        sessions.push(SessionSummary {
            session_id: (*session_id).to_owned(),
            condition: *condition,
            trials: counts.total(),
            accuracy_true,
            accuracy_all,
            mean_rt_s: mean(&rts),
            mean_gaze_entropy: mean_entropy(recs, opts)?,
        });
    }

    Ok(AnalysisReport {
        options: *opts,
        trials: records.len(),
        conditions,
        sessions,
        clutter: breakdown(records, BreakdownKey::Clutter),
        shape: breakdown(records, BreakdownKey::Shape),
    })
}

/// Pooled gaze map of all trials in `condition` that recorded gaze.
pub fn condition_gaze_map(
    records: &[TrialRecord],
    condition: Condition,
    opts: &ReportOptions,
    bandwidth: Option<f64>,
) -> Result<Option<GazeMap>> {
    let trace: Vec<GazePoint> =
        records.iter().filter(|r| r.condition == condition).flat_map(|r| r.gaze.iter().copied()).collect();
    if trace.is_empty() {
        return Ok(None);
    }
    gaze_map(&trace, opts.frame_width, opts.frame_height, opts.grid_size, bandwidth).map(Some)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Long-format CSV: `section,condition,group,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,condition,group,metric,value\n");
        let mut row = |section: &str, cond: &Condition, group: &str, metric: &str, value: String| {
            let _ = writeln!(out, "{section},{cond},{group},{metric},{value}");
        };
        for c in &self.conditions {
            row("condition", &c.condition, "", "trials", c.counts.total().to_string());
            row("condition", &c.condition, "", "accuracy_true", opt(c.accuracy_true));
            row("condition", &c.condition, "", "accuracy_all", c.accuracy_all.to_string());
            row("condition", &c.condition, "", "mean_rt_s", c.trial_time.mean_s.to_string());
            row("condition", &c.condition, "", "sd_rt_s", c.trial_time.sd_s.to_string());
            row("condition", &c.condition, "", "mean_gaze_entropy", opt(c.mean_gaze_entropy));
            for rep in &c.classification {
                let m = rep.mapping.as_str();
                for (class, cm) in [("false", &rep.false_trials), ("true", &rep.true_trials)] {
                    row("classification", &c.condition, &format!("{m}:{class}"), "precision", cm.precision.to_string());
                    row("classification", &c.condition, &format!("{m}:{class}"), "recall", cm.recall.to_string());
                    row("classification", &c.condition, &format!("{m}:{class}"), "f1", cm.f1.to_string());
                    row("classification", &c.condition, &format!("{m}:{class}"), "support", cm.support.to_string());
                }
                for (avg, a) in [("macro", &rep.macro_avg), ("weighted", &rep.weighted_avg)] {
                    row("classification", &c.condition, &format!("{m}:{avg}"), "precision", a.precision.to_string());
                    row("classification", &c.condition, &format!("{m}:{avg}"), "recall", a.recall.to_string());
                    row("classification", &c.condition, &format!("{m}:{avg}"), "f1", a.f1.to_string());
                }
                row("classification", &c.condition, m, "accuracy", rep.accuracy.to_string());
            }
        }
        for s in &self.sessions {
            let g = s.session_id.as_str();
            row("session", &s.condition, g, "trials", s.trials.to_string());
            row("session", &s.condition, g, "accuracy_true", opt(s.accuracy_true));
            row("session", &s.condition, g, "accuracy_all", s.accuracy_all.to_string());
            row("session", &s.condition, g, "mean_rt_s", s.mean_rt_s.to_string());
            row("session", &s.condition, g, "mean_gaze_entropy", opt(s.mean_gaze_entropy));
        }
        for (section, rows) in [("clutter", &self.clutter), ("shape", &self.shape)] {
            for r in rows {
                let g = r.group.as_str();
                row(section, &r.condition, g, "trials", r.trials.to_string());
                row(section, &r.condition, g, "accuracy_true", opt(r.accuracy_true));
                row(section, &r.condition, g, "accuracy_all", r.accuracy_all.to_string());
                row(section, &r.condition, g, "participant_mean_true", opt(r.participant_mean_true));
                row(section, &r.condition, g, "sem_true", opt(r.sem_true));
                row(section, &r.condition, g, "participant_mean_all", r.participant_mean_all.to_string());
                row(section, &r.condition, g, "sem_all", opt(r.sem_all));
            }
        }
        out
    }
}
