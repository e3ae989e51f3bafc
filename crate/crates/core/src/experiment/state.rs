use serde::{Deserialize, Serialize};

use super::{Decision, Outcome, Scorer, SessionPlan, TrialRecord, TrialSpec};
use crate::error::{Error, Result};
use crate::maskstore::{GazePoint, SelectionPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Target name on a black screen.
    Cue,
    Stimulus,
    Break,
    Done,
}

/// Protocol events. Times are on the session clock in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// Re-announces the current cue; legal only in the cue phase.
    ShowCue,
    ShowStimulus { t_ms: u64 },
    Decide { decision: Decision, t_ms: u64 },
    Resume,
}

/// What a successful event changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDelta {
    pub phase: Phase,
    /// Index of the current (or next) trial.
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GazeAck {
    Appended,
    /// Same timestamp as the previous sample; dropped.
    Duplicate,
    /// Older than the previous sample or the stimulus onset; dropped.
    OutOfOrder,
    /// Not in the stimulus phase; nothing recorded.
    Ignored,
}

/// Single-writer state machine for one session.
#[derive(Debug, Clone)]
pub struct SessionState {
    session_id: String,
    plan: SessionPlan,
    policy: SelectionPolicy,
    phase: Phase,
    index: usize,
    records: Vec<TrialRecord>,
    onset_ms: u64,
    trace: Vec<GazePoint>,
    duplicates_dropped: usize,
}

impl SessionState {
    pub fn new(session_id: impl Into<String>, plan: SessionPlan, policy: SelectionPolicy) -> Self {
        let phase = if plan.trials.is_empty() { Phase::Done } else { Phase::Cue };
        Self {
            session_id: session_id.into(),
            plan,
            policy,
            phase,
            index: 0,
            records: Vec::new(),
            onset_ms: 0,
            trace: Vec::new(),
            duplicates_dropped: 0,
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn plan(&self) -> &SessionPlan {
        &self.plan
    }

    pub fn policy(&self) -> SelectionPolicy {
        self.policy
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    /// Trial being cued or shown, if any.
    pub fn current(&self) -> Option<&TrialSpec> {
        match self.phase {
            Phase::Cue | Phase::Stimulus => self.plan.trials.get(self.index),
            _ => None,
        }
    }

    pub fn onset_ms(&self) -> u64 {
        self.onset_ms
    }

    pub fn live_trace(&self) -> &[GazePoint] {
        &self.trace
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    fn delta(&self, outcome: Option<Outcome>) -> StateDelta {
        StateDelta { phase: self.phase, index: self.index, outcome }
    }

    fn illegal(&self, what: &str) -> Error {
        Error::Protocol(format!("{what} is not allowed in the {:?} phase", self.phase))
    }

    /// Applies one event. On error the state is left untouched.
    pub fn advance(&mut self, event: Event, scorer: &dyn Scorer) -> Result<StateDelta> {
        match (self.phase, event) {
            (Phase::Cue, Event::ShowCue) => Ok(self.delta(None)),
            (Phase::Cue, Event::ShowStimulus { t_ms }) => {
                self.phase = Phase::Stimulus;
                self.onset_ms = t_ms;
                self.trace.clear();
                Ok(self.delta(None))
            }
            (Phase::Stimulus, Event::Decide { decision, t_ms }) => {
                if t_ms < self.onset_ms {
                    return Err(Error::Protocol(format!(
                        "decision at {t_ms} ms precedes stimulus onset at {} ms",
                        self.onset_ms
                    )));
                }
                let spec = &self.plan.trials[self.index];
                let outcome = scorer.score(spec, &decision)?;
                self.records.push(TrialRecord {
                    session_id: self.session_id.clone(),
                    condition: self.plan.condition,
                    index: self.index,
                    image_id: spec.image_id.clone(),
                    target_label: spec.target_label.clone(),
                    target_present: spec.target_present,
                    clutter: spec.clutter_level,
                    shape: spec.target_shape,
                    onset_ms: self.onset_ms,
                    decision,
                    rt_ms: t_ms - self.onset_ms,
                    outcome,
                    policy: self.policy,
                    gaze: std::mem::take(&mut self.trace),
                });
                self.index += 1;
                self.phase = if self.index == self.plan.trials.len() {
                    Phase::Done
                } else if self.plan.break_after == Some(self.index) {
                    Phase::Break
                } else {
                    Phase::Cue
                };
                Ok(self.delta(Some(outcome)))
            }
            (Phase::Break, Event::Resume) => {
                self.phase = Phase::Cue;
                Ok(self.delta(None))
            }
            (_, Event::ShowCue) => Err(self.illegal("show_cue")),
            (_, Event::ShowStimulus { .. }) => Err(self.illegal("show_stimulus")),
            (_, Event::Decide { .. }) => Err(self.illegal("a decision")),
            (_, Event::Resume) => Err(self.illegal("resume")),
        }
    }

    /// Appends a gaze sample taken at session time `t_ms` to the live trace.
    pub fn record_gaze(&mut self, t_ms: u64, x: f64, y: f64) -> GazeAck {
        if self.phase != Phase::Stimulus {
            return GazeAck::Ignored;
        }
        let Some(t) = t_ms.checked_sub(self.onset_ms) else {
            return GazeAck::OutOfOrder;
        };
        match self.trace.last() {
            Some(last) if last.t == t => {
                if self.duplicates_dropped == 0 {
                    log::debug!("session {}: dropping duplicate gaze timestamps", self.session_id);
                }
                self.duplicates_dropped += 1;
                GazeAck::Duplicate
            }
            Some(last) if last.t > t => GazeAck::OutOfOrder,
            _ => {
                self.trace.push(GazePoint { x, y, t });
                GazeAck::Appended
            }
        }
    }
}

/// Rebuilds a session from its log and drives it through the state machine
/// again, re-scoring every decision.
pub fn replay_records(records: &[TrialRecord], scorer: &dyn Scorer) -> Result<Vec<TrialRecord>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    for (i, r) in records.iter().enumerate() {
        if r.index != i || r.session_id != first.session_id || r.condition != first.condition {
            return Err(Error::Data(format!("log line {} breaks session continuity", i + 1)));
        }
    }
    let plan = SessionPlan {
        condition: first.condition,
        seed: 0,
        trials: records.iter().map(TrialRecord::spec).collect(),
        break_after: first.condition.has_break().then_some(super::BREAK_AFTER),
    };
    let mut state = SessionState::new(first.session_id.clone(), plan, first.policy);
    for r in records {
        if state.phase() == Phase::Break {
            state.advance(Event::Resume, scorer)?;
        }
        state.advance(Event::ShowCue, scorer)?;
        state.advance(Event::ShowStimulus { t_ms: r.onset_ms }, scorer)?;
        for g in &r.gaze {
            state.record_gaze(r.onset_ms + g.t, g.x, g.y);
        }
        state.advance(Event::Decide { decision: r.decision, t_ms: r.onset_ms + r.rt_ms }, scorer)?;
    }
    Ok(state.records)
}
