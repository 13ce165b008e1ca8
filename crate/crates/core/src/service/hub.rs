use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::session::{Agreement, Phase, ReconveneAlert, Role, SessionEvent, SessionState};
use super::telemetry::{
    evaluate_drift, next_intervention, ConsumptionSample, InterventionStatus, MixSample, RuleConfig,
    TelemetryWindow,
};
use crate::consensus::{positionality_choice, ConsensusGeometry, SocialChoiceResult};
use crate::error::{CoosError, Result};
use crate::intent::{diagnose, IntentGroup};
use crate::pclm::{
    select_question, ComparisonResponse, ParticipantId, PreferenceModel, PreferenceSummary, ScenarioCloud,
    Winner, MAX_QUESTIONS,
};
use crate::sim::{RawIndices, Scenario};
use crate::ternary::{CoordinateBound, TernaryPoint};

pub const EVENT_LOG_FORMAT: &str = "coos-session-events";
pub const EVENT_LOG_VERSION: u32 = 1;

/// A named, normalized scenario set sessions can refer to.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    name: String,
    scenarios: Vec<Scenario>,
    index: BTreeMap<u64, usize>,
    cloud: ScenarioCloud,
}

impl ScenarioSet {
    pub fn new(name: impl Into<String>, scenarios: Vec<Scenario>) -> Result<Self> {
        let cloud = ScenarioCloud::from_scenarios(&scenarios)?;
        if cloud.len() < 2 {
            return Err(CoosError::domain("a scenario set needs at least two scenarios"));
        }
        let index = scenarios.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        Ok(ScenarioSet {
            name: name.into(),
            scenarios,
            index,
            cloud,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn cloud(&self) -> &ScenarioCloud {
        &self.cloud
    }

    pub fn get(&self, id: u64) -> Result<&Scenario> {
        self.index
            .get(&id)
            .map(|&i| &self.scenarios[i])
            .ok_or_else(|| CoosError::not_found("scenario", id))
    }

    pub fn point(&self, id: u64) -> Result<TernaryPoint> {
        match self.get(id)?.point {
            Some(p) => Ok(p),
            None => self.cloud.point(id),
        }
    }

    pub fn points(&self) -> Result<Vec<(u64, TernaryPoint)>> {
        self.scenarios.iter().map(|s| Ok((s.id, self.point(s.id)?))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HubConfig {
    pub rules: RuleConfig,
    pub max_questions: usize,
    /// Write a snapshot document every this many events (0 disables).
    pub snapshot_every: u64,
}

impl Default for HubConfig {
    fn default() -> Self {
        HubConfig {
            rules: RuleConfig::default(),
            max_questions: MAX_QUESTIONS,
            snapshot_every: 32,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub name: String,
    pub scenario_set: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub default_baseline_kwh: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct JoinRequest {
    pub display_name: String,
    pub role: Role,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AdvanceRequest {
    pub to: Phase,
    pub actor: ParticipantId,
    #[serde(default)]
    pub agreed_scenario: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub scenario_id: u64,
    pub raw: RawIndices,
    pub point: TernaryPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuestionPayload {
    pub question_id: u64,
    pub choice_a: Choice,
    pub choice_b: Choice,
    /// Questions answered so far by this participant.
    pub answered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ConsensusQuery {
    pub size_weighted: bool,
    pub dims_total: u32,
    pub dims_respected: u32,
}

impl Default for ConsensusQuery {
    fn default() -> Self {
        ConsensusQuery {
            size_weighted: true,
            dims_total: 3,
            dims_respected: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub groups: Vec<IntentGroup>,
    pub geometry: ConsensusGeometry,
    pub impasse: bool,
    /// Present when at least two groups exist.
    pub social_choice: Option<SocialChoiceResult>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TelemetryPost {
    pub source: String,
    pub series: serde_json::Value,
}

struct EventLog {
    file: File,
    snapshot_path: PathBuf,
}

struct SessionEntry {
    state: SessionState,
    events: Vec<SessionEvent>,
    models: BTreeMap<ParticipantId, PreferenceModel>,
    set: Arc<ScenarioSet>,
    log: Option<EventLog>,
}

impl SessionEntry {
    fn commit(&mut self, event: SessionEvent, snapshot_every: u64) -> Result<()> {
        let mut next = self.state.clone();
        next.apply(&event)?;
        if let Some(log) = &mut self.log {
            let mut line = serde_json::to_vec(&event)?;
            line.push(b'\n');
            log.file.write_all(&line)?;
            log.file.flush()?;
            if snapshot_every > 0 && next.event_count % snapshot_every == 0 {
                fs::write(&log.snapshot_path, next.snapshot_bytes())?;
            }
        }
        self.state = next;
        self.events.push(event);
        Ok(())
    }

    fn model(&mut self, pid: ParticipantId) -> Result<&mut PreferenceModel> {
        if !self.models.contains_key(&pid) {
            let responses = self.state.participant(pid)?.responses();
            let model = PreferenceModel::replay(pid, &responses, self.set.cloud())?;
            self.models.insert(pid, model);
        }
        Ok(self.models.get_mut(&pid).expect("inserted above"))
    }

    fn choice(&self, id: u64) -> Result<Choice> {
        Ok(Choice {
            scenario_id: id,
            raw: self.set.get(id)?.raw,
            point: self.set.point(id)?,
        })
    }

    fn question_payload(&self, pid: ParticipantId, qid: u64) -> Result<QuestionPayload> {
        let p = self.state.participant(pid)?;
        let q = p
            .questions
            .iter()
            .find(|q| q.question_id == qid)
            .ok_or_else(|| CoosError::not_found("question", qid))?;
        Ok(QuestionPayload {
            question_id: qid,
            choice_a: self.choice(q.scenario_a_id)?,
            choice_b: self.choice(q.scenario_b_id)?,
            answered: p.answered(),
        })
    }

    fn preference_points(&mut self) -> Result<BTreeMap<ParticipantId, TernaryPoint>> {
        let answered: Vec<ParticipantId> = self
            .state
            .participants
            .values()
            .filter(|p| p.answered() > 0)
            .map(|p| p.participant_id)
            .collect();
        let mut points = BTreeMap::new();
        for pid in answered {
            points.insert(pid, self.model(pid)?.map_estimate());
        }
        Ok(points)
    }
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Sessions, scenario library and telemetry behind the HTTP API. Each session
/// is guarded by its own lock, so requests against one session are applied in
/// a single total order while distinct sessions proceed independently.
pub struct Hub {
    config: HubConfig,
    library: BTreeMap<String, Arc<ScenarioSet>>,
    sessions: RwLock<BTreeMap<u64, Arc<Mutex<SessionEntry>>>>,
    telemetry: RwLock<TelemetryWindow>,
    next_session: AtomicU64,
    next_participant: AtomicU64,
    data_dir: Option<PathBuf>,
    clock: fn() -> u64,
}

impl Hub {
    pub fn new(config: HubConfig, library: Vec<ScenarioSet>) -> Self {
        Hub {
            config,
            library: library
                .into_iter()
                .map(|s| (s.name.clone(), Arc::new(s)))
                .collect(),
            sessions: RwLock::new(BTreeMap::new()),
            telemetry: RwLock::new(TelemetryWindow::default()),
            next_session: AtomicU64::new(1),
            next_participant: AtomicU64::new(1),
            data_dir: None,
            clock: now_millis,
        }
    }

    /// Replaces the wall clock used to timestamp answers.
    pub fn with_clock(mut self, clock: fn() -> u64) -> Self {
        self.clock = clock;
        self
    }

    /// Persists session event logs under `dir`, replaying any logs found there.
    pub fn with_data_dir(mut self, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("session-") && n.ends_with(".events.jsonl"))
            })
            .collect();
        paths.sort();
        let mut max_session = 0;
        let mut max_participant = 0;
        {
            let mut sessions = self.sessions.write();
            for path in paths {
                let events = read_event_log(&path)?;
                let state = SessionState::replay(&events)?;
                let set = self.scenario_set(&state.scenario_set)?;
                max_session = max_session.max(state.session_id);
                if let Some(p) = state.participants.keys().next_back() {
                    max_participant = max_participant.max(p.0);
                }
                let file = OpenOptions::new().append(true).open(&path)?;
                let entry = SessionEntry {
                    log: Some(EventLog {
                        file,
                        snapshot_path: snapshot_path(dir, state.session_id),
                    }),
                    state,
                    events,
                    models: BTreeMap::new(),
                    set,
                };
                sessions.insert(entry.state.session_id, Arc::new(Mutex::new(entry)));
            }
        }
        self.next_session = AtomicU64::new(max_session + 1);
        self.next_participant = AtomicU64::new(max_participant + 1);
        self.data_dir = Some(dir.to_path_buf());
        Ok(self)
    }

    pub fn config(&self) -> &HubConfig {
        &self.config
    }

    pub fn scenario_set(&self, name: &str) -> Result<Arc<ScenarioSet>> {
        self.library
            .get(name)
            .cloned()
            .ok_or_else(|| CoosError::not_found("scenario set", name))
    }

    pub fn scenario_set_names(&self) -> Vec<String> {
        self.library.keys().cloned().collect()
    }

    fn session(&self, id: u64) -> Result<Arc<Mutex<SessionEntry>>> {
        self.sessions
            .read()
            .get(&id)
            .cloned()
            .ok_or_else(|| CoosError::not_found("session", id))
    }

    pub fn session_ids(&self) -> Vec<u64> {
        self.sessions.read().keys().copied().collect()
    }

    pub fn create_session(&self, req: CreateSession) -> Result<u64> {
        let set = self.scenario_set(&req.scenario_set)?;
        if req.default_baseline_kwh.is_some_and(|b| !(b > 0.0 && b.is_finite())) {
            return Err(CoosError::domain("default baseline must be positive"));
        }
        let id = self.next_session.fetch_add(1, Ordering::SeqCst);
        let created = SessionEvent::Created {
            session_id: id,
            name: req.name,
            scenario_set: req.scenario_set,
            seed: req.seed,
            default_baseline_kwh: req.default_baseline_kwh,
        };
        let state = SessionState::genesis(&created)?;
        let log = match &self.data_dir {
            Some(dir) => {
                let path = dir.join(format!("session-{id:08}.events.jsonl"));
                let mut file = OpenOptions::new().create_new(true).append(true).open(&path)?;
                let header = serde_json::json!({"format": EVENT_LOG_FORMAT, "version": EVENT_LOG_VERSION});
                writeln!(file, "{header}")?;
                writeln!(file, "{}", serde_json::to_string(&created)?)?;
                file.flush()?;
                Some(EventLog {
                    file,
                    snapshot_path: snapshot_path(dir, id),
                })
            }
            None => None,
        };
        let entry = SessionEntry {
            state,
            events: vec![created],
            models: BTreeMap::new(),
            set,
            log,
        };
        self.sessions.write().insert(id, Arc::new(Mutex::new(entry)));
        Ok(id)
    }

    pub fn snapshot(&self, id: u64) -> Result<SessionState> {
        Ok(self.session(id)?.lock().state.clone())
    }

    pub fn events(&self, id: u64) -> Result<Vec<SessionEvent>> {
        Ok(self.session(id)?.lock().events.clone())
    }

    pub fn join(&self, id: u64, req: JoinRequest) -> Result<ParticipantId> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        if req.display_name.trim().is_empty() {
            return Err(CoosError::domain("display name must not be empty"));
        }
        let pid = ParticipantId(self.next_participant.fetch_add(1, Ordering::SeqCst));
        entry.commit(
            SessionEvent::ParticipantJoined {
                participant_id: pid,
                display_name: req.display_name,
                role: req.role,
            },
            self.config.snapshot_every,
        )?;
        Ok(pid)
    }

    pub fn advance(&self, id: u64, req: AdvanceRequest) -> Result<SessionState> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        match entry.state.participants.get(&req.actor) {
            Some(p) if p.role == Role::Facilitator => {}
            _ => {
                return Err(CoosError::Forbidden(format!(
                    "participant {} is not a facilitator of session {id}",
                    req.actor
                )))
            }
        }
        let agreement = match req.agreed_scenario {
            Some(sid) => Some(Agreement {
                scenario_id: sid,
                generation_mix: entry.set.get(sid)?.generation_mix,
            }),
            None => None,
        };
        let from = entry.state.phase;
        entry.commit(
            SessionEvent::Advanced {
                from,
                to: req.to,
                agreement,
            },
            self.config.snapshot_every,
        )?;
        Ok(entry.state.clone())
    }

    /// The participant's open question, or a newly selected one. `None` once
    /// the posterior has converged, the question budget is spent, or every
    /// pair has been asked.
    pub fn next_question(&self, id: u64, pid: ParticipantId) -> Result<Option<QuestionPayload>> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        if entry.state.phase != Phase::Facilitating {
            return Err(CoosError::Conflict(format!(
                "questions are only issued while facilitating (session is {})",
                entry.state.phase
            )));
        }
        let participant = entry.state.participant(pid)?;
        if let Some(q) = participant.pending_question() {
            let qid = q.question_id;
            return entry.question_payload(pid, qid).map(Some);
        }
        let answered = participant.answered();
        let asked: BTreeSet<(u64, u64)> = participant
            .questions
            .iter()
            .map(|q| (q.scenario_a_id.min(q.scenario_b_id), q.scenario_a_id.max(q.scenario_b_id)))
            .collect();
        if answered >= self.config.max_questions {
            return Ok(None);
        }
        let seed = entry.state.seed
            ^ pid.0.wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ (answered as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        let set = entry.set.clone();
        let model = entry.model(pid)?;
        if model.estimate().converged {
            return Ok(None);
        }
        let Some((a, b)) = select_question(model, set.cloud(), &asked, seed)? else {
            return Ok(None);
        };
        let qid = entry.state.next_question_id;
        entry.commit(
            SessionEvent::QuestionIssued {
                participant_id: pid,
                question_id: qid,
                scenario_a_id: a,
                scenario_b_id: b,
            },
            self.config.snapshot_every,
        )?;
        entry.question_payload(pid, qid).map(Some)
    }

    /// Records an answer. Re-sending the same answer is a no-op; a different
    /// answer to an answered question is a conflict.
    pub fn answer(&self, id: u64, pid: ParticipantId, qid: u64, winner: Winner) -> Result<PreferenceSummary> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        let q = *entry
            .state
            .participant(pid)?
            .questions
            .iter()
            .find(|q| q.question_id == qid)
            .ok_or_else(|| CoosError::not_found("question", qid))?;
        match q.winner {
            Some(w) if w == winner => return Ok(entry.model(pid)?.summary()),
            Some(_) => {
                return Err(CoosError::Conflict(format!(
                    "question {qid} was already answered differently"
                )))
            }
            None => {}
        }
        let timestamp = (self.clock)();
        entry.commit(
            SessionEvent::ResponseRecorded {
                participant_id: pid,
                question_id: qid,
                winner,
                timestamp,
            },
            self.config.snapshot_every,
        )?;
        let set = entry.set.clone();
        let response = ComparisonResponse {
            question_id: qid,
            scenario_a_id: q.scenario_a_id,
            scenario_b_id: q.scenario_b_id,
            winner,
            timestamp,
        };
        let model = entry.model(pid)?;
        // a freshly replayed model already contains the response
        if !model.responses().iter().any(|r| r.question_id == qid) {
            model.apply(&response, set.cloud())?;
        }
        Ok(model.summary())
    }

    pub fn preference(&self, id: u64, pid: ParticipantId) -> Result<PreferenceSummary> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        Ok(entry.model(pid)?.summary())
    }

    pub fn intent(&self, id: u64) -> Result<Vec<IntentGroup>> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        let points = entry.preference_points()?;
        diagnose(&points, entry.state.seed)
    }

    pub fn consensus(&self, id: u64, query: ConsensusQuery) -> Result<ConsensusReport> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        let points = entry.preference_points()?;
        let groups = diagnose(&points, entry.state.seed)?;
        let mut geometry = ConsensusGeometry::build(&groups, query.size_weighted)?;
        for bound in entry.state.constraints.clone() {
            geometry = geometry.narrow(bound)?;
        }
        let social_choice = match groups.as_slice() {
            [majority, minority, ..] => Some(positionality_choice(
                majority,
                minority,
                query.dims_total,
                query.dims_respected,
                &entry.set.points()?,
            )?),
            _ => None,
        };
        Ok(ConsensusReport {
            impasse: geometry.is_impasse(),
            groups,
            geometry,
            social_choice,
        })
    }

    pub fn add_constraint(&self, id: u64, bound: CoordinateBound) -> Result<Vec<CoordinateBound>> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        entry.commit(SessionEvent::ConstraintApplied { bound }, self.config.snapshot_every)?;
        Ok(entry.state.constraints.clone())
    }

    /// Appends a telemetry series. `source` is `generation` (items `{t, mix}`)
    /// or `consumption:<participant id>` (items `{t, kwh}`). Returns the
    /// number of samples accepted.
    pub fn ingest_telemetry(&self, post: TelemetryPost) -> Result<usize> {
        let mut window = self.telemetry.write();
        if post.source == "generation" {
            let samples: Vec<MixSample> = serde_json::from_value(post.series)
                .map_err(|e| CoosError::domain(format!("invalid generation series: {e}")))?;
            window.push_generation(&samples)?;
            Ok(samples.len())
        } else if let Some(pid) = post.source.strip_prefix("consumption:") {
            let pid: ParticipantId = pid.parse()?;
            let samples: Vec<ConsumptionSample> = serde_json::from_value(post.series)
                .map_err(|e| CoosError::domain(format!("invalid consumption series: {e}")))?;
            window.push_consumption(pid, &samples)?;
            Ok(samples.len())
        } else {
            Err(CoosError::domain(format!(
                "unknown telemetry source {:?} (expected generation or consumption:<id>)",
                post.source
            )))
        }
    }

    pub fn telemetry(&self) -> TelemetryWindow {
        self.telemetry.read().clone()
    }

    /// Evaluates drift for an implementing session, raising at most one
    /// pending alert, and returns every alert of the session.
    pub fn alerts(&self, id: u64) -> Result<Vec<ReconveneAlert>> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        if entry.state.phase == Phase::Implementing && entry.state.pending_alert().is_none() {
            let raised = {
                let window = self.telemetry.read();
                evaluate_drift(&entry.state, &window, &self.config.rules)?
            };
            if let Some(alert) = raised {
                entry.commit(SessionEvent::AlertRaised { alert }, self.config.snapshot_every)?;
            }
        }
        Ok(entry.state.alerts.clone())
    }

    pub fn acknowledge_alert(&self, id: u64, alert_id: u64) -> Result<Vec<ReconveneAlert>> {
        let session = self.session(id)?;
        let mut entry = session.lock();
        entry.commit(SessionEvent::AlertAcknowledged { alert_id }, self.config.snapshot_every)?;
        Ok(entry.state.alerts.clone())
    }

    pub fn interventions(&self, id: u64, pid: ParticipantId) -> Result<InterventionStatus> {
        let session = self.session(id)?;
        let entry = session.lock();
        let window = self.telemetry.read();
        next_intervention(&entry.state, pid, &window, &self.config.rules)
    }
}

fn snapshot_path(dir: &Path, id: u64) -> PathBuf {
    dir.join(format!("session-{id:08}.snapshot.json"))
}

/// Reads an append-only session log: a header line, then one event per line.
pub fn read_event_log(path: &Path) -> Result<Vec<SessionEvent>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header: serde_json::Value = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => return Err(CoosError::Format(format!("{} is empty", path.display()))),
    };
    if header["format"] != EVENT_LOG_FORMAT || header["version"] != EVENT_LOG_VERSION {
        return Err(CoosError::Format(format!(
            "{} is not a version {EVENT_LOG_VERSION} session log",
            path.display()
        )));
    }
    let mut events = Vec::new();
    for line in lines {
        let line = line?;
        if !line.trim().is_empty() {
            events.push(serde_json::from_str(&line)?);
        }
    }
    Ok(events)
}
