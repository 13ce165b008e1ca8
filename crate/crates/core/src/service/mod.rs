//! Session service coupling both loops: the five-step consensus lifecycle,
//! participant question flow, group and consensus views, telemetry ingestion,
//! drift-triggered re-convening and consumption-proportional interventions.
//!
//! Session state is a pure fold of an append-only event log
//! ([`SessionState::replay`]); the drift and intervention rules are pure
//! functions of a session snapshot and a telemetry window.

mod http;
mod hub;
mod session;
mod telemetry;

pub use http::{router, serve};
pub use hub::{
    read_event_log, AdvanceRequest, Choice, ConsensusQuery, ConsensusReport, CreateSession, Hub, HubConfig,
    JoinRequest, QuestionPayload, ScenarioSet, TelemetryPost, EVENT_LOG_FORMAT, EVENT_LOG_VERSION,
};
pub use session::{
    Agreement, IssuedQuestion, Participant, Phase, ReconveneAlert, Role, SessionEvent, SessionState,
};
pub use telemetry::{
    evaluate_drift, next_intervention, tier_for_ratio, ConsumptionSample, InterventionMessage,
    InterventionStatus, MixSample, RuleConfig, TelemetryWindow,
};
