use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};
use crate::pclm::{ComparisonResponse, ParticipantId, Winner};
use crate::sim::GenerationMix;
use crate::ternary::CoordinateBound;

/// Lifecycle of a consensus session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Convening,
    RolesAssigned,
    Facilitating,
    ConsensusAchieved,
    Implementing,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Convening,
        Phase::RolesAssigned,
        Phase::Facilitating,
        Phase::ConsensusAchieved,
        Phase::Implementing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Convening => "convening",
            Phase::RolesAssigned => "roles_assigned",
            Phase::Facilitating => "facilitating",
            Phase::ConsensusAchieved => "consensus_achieved",
            Phase::Implementing => "implementing",
        }
    }

    /// Forward steps along the chain plus the single re-convene edge.
    pub fn can_transition(self, to: Phase) -> bool {
        use Phase::*;
        matches!(
            (self, to),
            (Convening, RolesAssigned)
                | (RolesAssigned, Facilitating)
                | (Facilitating, ConsensusAchieved)
                | (ConsensusAchieved, Implementing)
                | (Implementing, Convening)
        )
    }

    /// Phases in which an agreed scenario is recorded.
    pub fn has_agreement(self) -> bool {
        matches!(self, Phase::ConsensusAchieved | Phase::Implementing)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = CoosError;

    fn from_str(s: &str) -> Result<Self> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| CoosError::domain(format!("unknown phase {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Facilitator,
    Stakeholder,
}

/// Scenario the group agreed on, with the generation mix drift is measured
/// against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub scenario_id: u64,
    pub generation_mix: GenerationMix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IssuedQuestion {
    pub question_id: u64,
    pub scenario_a_id: u64,
    pub scenario_b_id: u64,
    pub winner: Option<Winner>,
    pub answered_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub participant_id: ParticipantId,
    pub display_name: String,
    pub role: Role,
    pub questions: Vec<IssuedQuestion>,
}

impl Participant {
    pub fn responses(&self) -> Vec<ComparisonResponse> {
        self.questions
            .iter()
            .filter_map(|q| {
                Some(ComparisonResponse {
                    question_id: q.question_id,
                    scenario_a_id: q.scenario_a_id,
                    scenario_b_id: q.scenario_b_id,
                    winner: q.winner?,
                    timestamp: q.answered_at.unwrap_or(0),
                })
            })
            .collect()
    }

    pub fn pending_question(&self) -> Option<&IssuedQuestion> {
        self.questions.iter().find(|q| q.winner.is_none())
    }

    pub fn answered(&self) -> usize {
        self.questions.iter().filter(|q| q.winner.is_some()).count()
    }
}

/// Drift alert asking the group to re-convene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconveneAlert {
    pub alert_id: u64,
    pub distance: f64,
    pub threshold: f64,
    pub observed_mix: GenerationMix,
    pub agreed_mix: GenerationMix,
    pub acknowledged: bool,
}

/// Append-only session history; the state is a fold of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        session_id: u64,
        name: String,
        scenario_set: String,
        seed: u64,
        default_baseline_kwh: Option<f64>,
    },
    ParticipantJoined {
        participant_id: ParticipantId,
        display_name: String,
        role: Role,
    },
    Advanced {
        from: Phase,
        to: Phase,
        agreement: Option<Agreement>,
    },
    QuestionIssued {
        participant_id: ParticipantId,
        question_id: u64,
        scenario_a_id: u64,
        scenario_b_id: u64,
    },
    ResponseRecorded {
        participant_id: ParticipantId,
        question_id: u64,
        winner: Winner,
        timestamp: u64,
    },
    ConstraintApplied {
        bound: CoordinateBound,
    },
    AlertRaised {
        alert: ReconveneAlert,
    },
    AlertAcknowledged {
        alert_id: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: u64,
    pub name: String,
    pub scenario_set: String,
    pub seed: u64,
    pub default_baseline_kwh: Option<f64>,
    pub phase: Phase,
    pub participants: BTreeMap<ParticipantId, Participant>,
    pub agreement: Option<Agreement>,
    pub constraints: Vec<CoordinateBound>,
    pub alerts: Vec<ReconveneAlert>,
    pub next_question_id: u64,
    pub event_count: u64,
}

impl SessionState {
    /// Folds an event log from its `Created` event.
    pub fn replay(events: &[SessionEvent]) -> Result<Self> {
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| CoosError::Format("empty session event log".into()))?;
        let mut state = Self::genesis(first)?;
        for e in rest {
            state.apply(e)?;
        }
        Ok(state)
    }

    pub fn genesis(event: &SessionEvent) -> Result<Self> {
        match event {
            SessionEvent::Created {
                session_id,
                name,
                scenario_set,
                seed,
                default_baseline_kwh,
            } => Ok(SessionState {
                session_id: *session_id,
                name: name.clone(),
                scenario_set: scenario_set.clone(),
                seed: *seed,
                default_baseline_kwh: *default_baseline_kwh,
                phase: Phase::Convening,
                participants: BTreeMap::new(),
                agreement: None,
                constraints: Vec::new(),
                alerts: Vec::new(),
                next_question_id: 1,
                event_count: 1,
            }),
            _ => Err(CoosError::Format("session log must start with a created event".into())),
        }
    }

    /// Stable serialized form; replaying the log reproduces these bytes.
    pub fn snapshot_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("session state serializes")
    }

    pub fn participant(&self, id: ParticipantId) -> Result<&Participant> {
        self.participants
            .get(&id)
            .ok_or_else(|| CoosError::not_found("participant", id))
    }

    pub fn pending_alert(&self) -> Option<&ReconveneAlert> {
        self.alerts.iter().find(|a| !a.acknowledged)
    }

    /// Checks that `event` is legal in the current state without applying it.
    pub fn validate(&self, event: &SessionEvent) -> Result<()> {
        self.clone().apply(event)
    }

    pub fn apply(&mut self, event: &SessionEvent) -> Result<()> {
        match event {
            SessionEvent::Created { .. } => {
                return Err(CoosError::Conflict("session already created".into()));
            }
            SessionEvent::ParticipantJoined {
                participant_id,
                display_name,
                role,
            } => {
                if self.participants.contains_key(participant_id) {
                    return Err(CoosError::Conflict(format!(
                        "participant {participant_id} already joined"
                    )));
                }
                self.participants.insert(
                    *participant_id,
                    Participant {
                        participant_id: *participant_id,
                        display_name: display_name.clone(),
                        role: *role,
                        questions: Vec::new(),
                    },
                );
            }
            SessionEvent::Advanced {
                from,
                to,
                agreement,
            } => {
                if *from != self.phase || !from.can_transition(*to) {
                    return Err(CoosError::IllegalTransition {
                        from: self.phase.to_string(),
                        to: to.to_string(),
                    });
                }
                match (*to, agreement) {
                    (Phase::ConsensusAchieved, None) => {
                        return Err(CoosError::domain(
                            "reaching consensus requires an agreed scenario",
                        ));
                    }
                    (Phase::ConsensusAchieved, Some(a)) => self.agreement = Some(*a),
                    (_, Some(_)) => {
                        return Err(CoosError::domain(
                            "an agreed scenario is only recorded when reaching consensus",
                        ));
                    }
                    (Phase::Convening, None) => {
                        // re-convene: a new round starts from a clean slate
                        self.agreement = None;
                        self.constraints.clear();
                        for a in &mut self.alerts {
                            a.acknowledged = true;
                        }
                    }
                    (_, None) => {}
                }
                self.phase = *to;
            }
            SessionEvent::QuestionIssued {
                participant_id,
                question_id,
                scenario_a_id,
                scenario_b_id,
            } => {
                self.require_phase(Phase::Facilitating)?;
                if *question_id != self.next_question_id {
                    return Err(CoosError::Conflict(format!(
                        "question id {question_id} out of sequence"
                    )));
                }
                let p = self.participant_mut(*participant_id)?;
                if p.pending_question().is_some() {
                    return Err(CoosError::Conflict(format!(
                        "participant {participant_id} has an unanswered question"
                    )));
                }
                p.questions.push(IssuedQuestion {
                    question_id: *question_id,
                    scenario_a_id: *scenario_a_id,
                    scenario_b_id: *scenario_b_id,
                    winner: None,
                    answered_at: None,
                });
                self.next_question_id += 1;
            }
            SessionEvent::ResponseRecorded {
                participant_id,
                question_id,
                winner,
                timestamp,
            } => {
                self.require_phase(Phase::Facilitating)?;
                let p = self.participant_mut(*participant_id)?;
                let q = p
                    .questions
                    .iter_mut()
                    .find(|q| q.question_id == *question_id)
                    .ok_or_else(|| CoosError::not_found("question", question_id))?;
                if q.winner.is_some() {
                    return Err(CoosError::Conflict(format!(
                        "question {question_id} already answered"
                    )));
                }
                q.winner = Some(*winner);
                q.answered_at = Some(*timestamp);
            }
            SessionEvent::ConstraintApplied { bound } => {
                self.require_phase(Phase::Facilitating)?;
                let bound = CoordinateBound::new(bound.axis, bound.kind, bound.value)?;
                self.constraints.push(bound);
            }
            SessionEvent::AlertRaised { alert } => {
                if self.pending_alert().is_some() {
                    return Err(CoosError::Conflict("an alert is already pending".into()));
                }
                if alert.alert_id != self.alerts.len() as u64 + 1 {
                    return Err(CoosError::Conflict("alert id out of sequence".into()));
                }
                self.alerts.push(*alert);
            }
            SessionEvent::AlertAcknowledged { alert_id } => {
                let a = self
                    .alerts
                    .iter_mut()
                    .find(|a| a.alert_id == *alert_id)
                    .ok_or_else(|| CoosError::not_found("alert", alert_id))?;
                a.acknowledged = true;
            }
        }
        self.event_count += 1;
        Ok(())
    }

    fn require_phase(&self, phase: Phase) -> Result<()> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(CoosError::Conflict(format!(
                "operation requires phase {phase}, session is in {}",
                self.phase
            )))
        }
    }

    fn participant_mut(&mut self, id: ParticipantId) -> Result<&mut Participant> {
        self.participants
            .get_mut(&id)
            .ok_or_else(|| CoosError::not_found("participant", id))
    }
}
