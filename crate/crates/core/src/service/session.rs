use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{
    build_session, write_log, ArchiveScorer, Condition, Dataset, Decision, Event, GazeAck, Phase, SessionState,
    StateDelta, DEFAULT_TOLERANCE_PX,
};
use crate::imaging::{
    canny_edges, encode_gray_png, encode_rgb_png, load_rgb, resize_rgb, EdgeParams, GrayFrame,
};
use crate::maskstore::{compose_gcss, GazePoint, MaskArchive, SelectionPolicy, DEFAULT_EDGE_GAIN};
use crate::simulator::{render_frame, sample_layout, ElectrodeLayout, SimParams};

fn default_edge_gain() -> f64 {
    DEFAULT_EDGE_GAIN
}

fn default_tolerance() -> u32 {
    DEFAULT_TOLERANCE_PX
}

/// Body of a create-session request. Everything but the dataset, condition
/// and seed has a default; `sim` and `edges` accept partial objects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Path to `dataset.json`.
    pub dataset: PathBuf,
    pub condition: String,
    pub seed: u64,
    #[serde(default)]
    pub selection_policy: SelectionPolicy,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub edges: EdgeParams,
    #[serde(default = "default_edge_gain")]
    pub edge_gain: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance_px: u32,
    /// Electrode layout seed; defaults to `seed`.
    #[serde(default)]
    pub layout_seed: Option<u64>,
}

impl SessionConfig {
    pub fn new(dataset: impl Into<PathBuf>, condition: Condition, seed: u64) -> Self {
        Self {
            dataset: dataset.into(),
            condition: condition.as_str().to_owned(),
            seed,
            selection_policy: SelectionPolicy::default(),
            sim: SimParams::default(),
            edges: EdgeParams::default(),
            edge_gain: DEFAULT_EDGE_GAIN,
            tolerance_px: DEFAULT_TOLERANCE_PX,
            layout_seed: None,
        }
    }
}

/// Client input. Coordinates are display pixels on the `output_size` canvas;
/// `t` is the session clock in ms and defaults to the server's clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientEvent {
    Gaze {
        #[serde(default)]
        t: Option<u64>,
        x: f64,
        y: f64,
    },
    ClickLeft {
        #[serde(default)]
        t: Option<u64>,
        x: f64,
        y: f64,
    },
    ClickRight {
        #[serde(default)]
        t: Option<u64>,
    },
    /// Ends the cue and shows the stimulus.
    Advance {
        #[serde(default)]
        t: Option<u64>,
    },
    Resume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReply {
    /// Set for gaze events.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaze: Option<GazeAck>,
    pub delta: StateDelta,
    /// Target to cue, while in the cue or stimulus phase.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub condition: Condition,
    pub seed: u64,
    pub created_ms: u64,
    pub trials: usize,
    pub phase: Phase,
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_label: Option<String>,
    pub frame_seq: u64,
    pub output_size: u32,
}

/// One encoded frame with its per-session sequence number.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub seq: u64,
    pub index: usize,
    pub png: Arc<Vec<u8>>,
}

/// Un-encoded frame content.
#[derive(Debug, Clone, PartialEq)]
pub enum Rendered {
    Phosphene(GrayFrame),
    /// PNG bytes of the colour image at display size.
    Coloured(Arc<Vec<u8>>),
}

/// Per-trial stimulus data, built on first frame request.
struct TrialAssets {
    index: usize,
    archive: Arc<MaskArchive>,
    edges: Option<GrayFrame>,
    coloured: Option<Arc<Vec<u8>>>,
}

pub struct Session {
    id: String,
    created_ms: u64,
    clock: Instant,
    state: SessionState,
    scorer: ArchiveScorer,
    layout: ElectrodeLayout,
    sim: SimParams,
    edges: EdgeParams,
    edge_gain: f64,
    frame_seq: u64,
    assets: Option<TrialAssets>,
}

impl Session {
    pub fn create(id: String, config: &SessionConfig) -> Result<Self> {
        let condition: Condition = config.condition.parse()?;
        config.sim.validate()?;
        config.edges.validate()?;
        if !(0.0..=1.0).contains(&config.edge_gain) {
            return Err(Error::invalid(format!("edge_gain {} outside [0, 1]", config.edge_gain)));
        }
        let dataset = Dataset::load(&config.dataset)?;
        let plan = build_session(&dataset, condition, config.seed)?;
        let layout = sample_layout(&config.sim, config.layout_seed.unwrap_or(config.seed))?;
        let created_ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
        Ok(Self {
            state: SessionState::new(id.clone(), plan, config.selection_policy),
            id,
            created_ms,
            clock: Instant::now(),
            scorer: ArchiveScorer::new(dataset, config.tolerance_px),
            layout,
            sim: config.sim.clone(),
            edges: config.edges,
            edge_gain: config.edge_gain,
            frame_seq: 0,
            assets: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn layout(&self) -> &ElectrodeLayout {
        &self.layout
    }

    pub fn sim(&self) -> &SimParams {
        &self.sim
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            session_id: self.id.clone(),
            condition: self.state.plan().condition,
            seed: self.state.plan().seed,
            created_ms: self.created_ms,
            trials: self.state.plan().trials.len(),
            phase: self.state.phase(),
            index: self.state.index(),
            target_label: self.state.current().map(|t| t.target_label.clone()),
            frame_seq: self.frame_seq,
            output_size: self.sim.output_size,
        }
    }

    fn now(&self, t: Option<u64>) -> u64 {
        t.unwrap_or_else(|| self.clock.elapsed().as_millis() as u64)
    }

    /// Display-to-stimulus scale for the current trial's archive.
    fn to_stimulus(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let a = self.current_archive()?;
        let s = f64::from(a.width()) / f64::from(self.sim.output_size);
        let sy = f64::from(a.height()) / f64::from(self.sim.output_size);
        Ok((x * s, y * sy))
    }

    fn current_archive(&self) -> Result<Arc<MaskArchive>> {
        let spec = self.state.current().ok_or_else(|| Error::Protocol("no current trial".into()))?;
        self.scorer.archive(&spec.image_id)
    }

    pub fn ingest(&mut self, event: ClientEvent) -> Result<EventReply> {
        let mut gaze = None;
        let delta = match event {
            ClientEvent::Gaze { t, x, y } => {
                let t = self.now(t);
                let ack = if self.state.phase() == Phase::Stimulus {
                    let (sx, sy) = self.to_stimulus(x, y)?;
                    self.state.record_gaze(t, sx, sy)
                } else {
                    GazeAck::Ignored
                };
                gaze = Some(ack);
                StateDelta { phase: self.state.phase(), index: self.state.index(), outcome: None }
            }
            ClientEvent::ClickLeft { t, x, y } => {
                let t = self.now(t);
                if self.state.phase() != Phase::Stimulus {
                    return Err(Error::Protocol(format!("click_left is not allowed in the {:?} phase", self.state.phase())));
                }
                let (sx, sy) = self.to_stimulus(x, y)?;
                self.state.advance(Event::Decide { decision: Decision::Click { x: sx, y: sy }, t_ms: t }, &self.scorer)?
            }
            ClientEvent::ClickRight { t } => {
                let t = self.now(t);
                self.state.advance(Event::Decide { decision: Decision::Absent, t_ms: t }, &self.scorer)?
            }
            ClientEvent::Advance { t } => {
                let t = self.now(t);
                self.state.advance(Event::ShowStimulus { t_ms: t }, &self.scorer)?
            }
            ClientEvent::Resume => self.state.advance(Event::Resume, &self.scorer)?,
        };
        Ok(EventReply { gaze, delta, target_label: self.state.current().map(|t| t.target_label.clone()) })
    }

    fn assets(&mut self) -> Result<&TrialAssets> {
        let index = self.state.index();
        if self.assets.as_ref().map(|a| a.index) != Some(index) {
            let spec = self.state.current().ok_or_else(|| Error::Protocol("no current trial".into()))?.clone();
            let archive = self.scorer.archive(&spec.image_id)?;
            let path = self.scorer.dataset().image_path(&spec.image_id)?;
            let (edges, coloured) = if spec.condition == Condition::Coloured {
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                let n = self.sim.output_size;
                let img = image::load_from_memory(&bytes)?;
                let png = if img.width() == n && img.height() == n && bytes.starts_with(b"\x89PNG") {
                    bytes
                } else {
                    encode_rgb_png(&resize_rgb(&load_rgb(&path)?, n, n)?)?
                };
                (None, Some(Arc::new(png)))
            } else {
                let rgb = resize_rgb(&load_rgb(&path)?, archive.width(), archive.height())?;
                (Some(canny_edges(&rgb.to_gray(), &self.edges)?), None)
            };
            self.assets = Some(TrialAssets { index, archive, edges, coloured });
        }
        Ok(self.assets.as_ref().expect("assets just built"))
    }

    /// Renders the current stimulus for a display-space gaze point.
    pub fn render(&mut self, x: f64, y: f64) -> Result<Rendered> {
        if self.state.phase() != Phase::Stimulus {
            return Err(Error::Protocol(format!("frames are only served in the stimulus phase, not {:?}", self.state.phase())));
        }
        let (sx, sy) = self.to_stimulus(x, y)?;
        let g = GazePoint::new(sx, sy);
        let condition = self.state.plan().condition;
        let policy = self.state.policy();
        let edge_gain = self.edge_gain;
        let assets = self.assets()?;
        let stimulus = match condition {
            Condition::Coloured => {
                return Ok(Rendered::Coloured(assets.coloured.clone().expect("coloured assets")));
            }
            Condition::Edges => assets.edges.clone().expect("edge assets"),
            Condition::Gcss => {
                compose_gcss(&assets.archive, &g, assets.edges.as_ref().expect("edge assets"), edge_gain, policy)?
            }
        };
        Ok(Rendered::Phosphene(render_frame(&stimulus, &g, &self.layout, &self.sim)?))
    }

    pub fn next_frame(&mut self, x: f64, y: f64) -> Result<Frame> {
        let png = match self.render(x, y)? {
            Rendered::Phosphene(f) => Arc::new(encode_gray_png(&f)?),
            Rendered::Coloured(png) => png,
        };
        self.frame_seq += 1;
        Ok(Frame { seq: self.frame_seq, index: self.state.index(), png })
    }

    pub fn export_log(&self, force: bool) -> Result<String> {
        if self.state.phase() != Phase::Done && !force {
            return Err(Error::Precondition(format!(
                "session {} has completed {} of {} trials; export with force to write a partial log",
                self.id,
                self.state.records().len(),
                self.state.plan().trials.len()
            )));
        }
        write_log(self.state.records())
    }
}

/// Registry of live sessions. Each session is a single-writer state machine
/// behind its own lock, so events and frames of one session are serialized
/// while different sessions proceed in parallel.
#[derive(Default)]
pub struct SessionManager {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl SessionManager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, config: &SessionConfig) -> Result<SessionInfo> {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("s{n:04}");
        let session = Session::create(id.clone(), config)?;
        let info = session.info();
        self.sessions.lock().expect("session table lock").insert(id, Arc::new(Mutex::new(session)));
        log::info!("created session {} ({}, seed {})", info.session_id, info.condition, info.seed);
        Ok(info)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .lock()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session {id:?}")))
    }

    fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<T> {
        let s = self.get(id)?;
        let mut guard = s.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn info(&self, id: &str) -> Result<SessionInfo> {
        self.with(id, |s| Ok(s.info()))
    }

    pub fn ingest(&self, id: &str, event: ClientEvent) -> Result<EventReply> {
        self.with(id, |s| s.ingest(event))
    }

    pub fn next_frame(&self, id: &str, x: f64, y: f64) -> Result<Frame> {
        self.with(id, |s| s.next_frame(x, y))
    }

    pub fn export_log(&self, id: &str, force: bool) -> Result<String> {
        self.with(id, |s| s.export_log(force))
    }

    pub fn remove(&self, id: &str) -> Result<()> {
        self.sessions
            .lock()
            .expect("session table lock")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| Error::NotFound(format!("session {id:?}")))
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session table lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_wire_format() {
        let e: ClientEvent = serde_json::from_str(r#"{"type":"click_left","x":3,"y":4.5}"#).unwrap();
        assert_eq!(e, ClientEvent::ClickLeft { t: None, x: 3.0, y: 4.5 });
        let e: ClientEvent = serde_json::from_str(r#"{"type":"gaze","t":12,"x":1,"y":2}"#).unwrap();
        assert_eq!(e, ClientEvent::Gaze { t: Some(12), x: 1.0, y: 2.0 });
        assert_eq!(serde_json::to_string(&ClientEvent::Resume).unwrap(), r#"{"type":"resume"}"#);
        assert!(serde_json::from_str::<ClientEvent>(r#"{"type":"jump"}"#).is_err());
    }

    #[test]
    fn config_defaults() {
        let c: SessionConfig =
            serde_json::from_str(r#"{"dataset":"d/dataset.json","condition":"GCSS","seed":3,"sim":{"current_ua":80}}"#).unwrap();
        assert_eq!(c.sim.current_ua, 80.0);
        assert_eq!(c.sim.n_electrodes, 600);
        assert_eq!(c.edges, EdgeParams::default());
        assert_eq!(c.edge_gain, 0.3);
        assert_eq!(c.tolerance_px, 10);
        assert_eq!(c.selection_policy, SelectionPolicy::Union);
    }

    #[test]
    fn unknown_session() {
        let m = SessionManager::new();
        assert!(matches!(m.info("nope"), Err(Error::NotFound(_))));
        assert!(matches!(m.ingest("nope", ClientEvent::Resume), Err(Error::NotFound(_))));
    }
}
