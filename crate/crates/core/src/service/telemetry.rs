use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::session::{Phase, ReconveneAlert, SessionState};
use crate::error::{CoosError, Result};
use crate::pclm::ParticipantId;
use crate::sim::GenerationMix;

/// Named constants of the drift and intervention rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Alert when the L1 mix distance is strictly greater than this.
    pub drift_threshold: f64,
    pub drift_window_hours: u64,
    /// Recent consumption window compared against the baseline.
    pub recent_hours: u64,
    /// Trailing window (before the recent window) the baseline is averaged over.
    pub baseline_hours: u64,
    /// Ratio thresholds for tiers 1, 2 and 3 (strict).
    pub tier_thresholds: [f64; 3],
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            drift_threshold: 0.2,
            drift_window_hours: 168,
            recent_hours: 24,
            baseline_hours: 672,
            tier_thresholds: [1.0, 1.2, 1.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixSample {
    /// Hour index.
    pub t: u64,
    pub mix: GenerationMix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionSample {
    pub t: u64,
    pub kwh: f64,
}

/// Telemetry received so far: community generation mix per hour and
/// per-participant consumption per hour. Timestamps strictly increase within
/// each source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TelemetryWindow {
    pub generation: Vec<MixSample>,
    pub consumption: BTreeMap<ParticipantId, Vec<ConsumptionSample>>,
}

fn check_increasing(last: Option<u64>, ts: impl Iterator<Item = u64>) -> Result<()> {
    let mut prev = last;
    for t in ts {
        if prev.is_some_and(|p| t <= p) {
            return Err(CoosError::domain(format!(
                "telemetry timestamps must strictly increase (got {t} after {})",
                prev.unwrap_or_default()
            )));
        }
        prev = Some(t);
    }
    Ok(())
}

impl TelemetryWindow {
    pub fn push_generation(&mut self, samples: &[MixSample]) -> Result<()> {
        check_increasing(self.generation.last().map(|s| s.t), samples.iter().map(|s| s.t))?;
        for s in samples {
            let m = s.mix.as_array();
            if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(CoosError::domain(format!("mix at t={} has negative or non-finite shares", s.t)));
            }
            let total: f64 = m.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(CoosError::domain(format!("mix at t={} sums to {total}", s.t)));
            }
        }
        self.generation.extend_from_slice(samples);
        Ok(())
    }

    pub fn push_consumption(&mut self, participant: ParticipantId, samples: &[ConsumptionSample]) -> Result<()> {
        let series = self.consumption.entry(participant).or_default();
        check_increasing(series.last().map(|s| s.t), samples.iter().map(|s| s.t))?;
        if let Some(s) = samples.iter().find(|s| !s.kwh.is_finite() || s.kwh < 0.0) {
            return Err(CoosError::domain(format!("consumption at t={} is negative or non-finite", s.t)));
        }
        series.extend_from_slice(samples);
        Ok(())
    }

    /// Mean generation mix over the `hours` ending at the latest sample.
    pub fn mean_mix(&self, hours: u64) -> Option<GenerationMix> {
        let last = self.generation.last()?.t;
        let recent: Vec<&MixSample> = self
            .generation
            .iter()
            .filter(|s| s.t + hours > last)
            .collect();
        let n = recent.len() as f64;
        let mut acc = [0.0; 3];
        for s in &recent {
            for (a, v) in acc.iter_mut().zip(s.mix.as_array()) {
                *a += v;
            }
        }
        Some(GenerationMix {
            solar: acc[0] / n,
            hydro: acc[1] / n,
            grid: acc[2] / n,
        })
    }
}

/// Drift check of the observed generation mix against the agreed scenario.
/// Returns the alert that should be raised, or `None` when the session is not
/// implementing an agreement, no generation telemetry exists, or the distance
/// is within the threshold. The alert id is the next one in the session.
pub fn evaluate_drift(
    session: &SessionState,
    window: &TelemetryWindow,
    config: &RuleConfig,
) -> Result<Option<ReconveneAlert>> {
    let agreement = session
        .agreement
        .ok_or_else(|| CoosError::domain("session has no agreed scenario"))?;
    if session.phase != Phase::Implementing {
        return Ok(None);
    }
    let Some(observed) = window.mean_mix(config.drift_window_hours) else {
        return Ok(None);
    };
    let distance = observed.l1(&agreement.generation_mix);
    if distance > config.drift_threshold {
        Ok(Some(ReconveneAlert {
            alert_id: session.alerts.len() as u64 + 1,
            distance,
            threshold: config.drift_threshold,
            observed_mix: observed,
            agreed_mix: agreement.generation_mix,
            acknowledged: false,
        }))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionMessage {
    pub participant_id: ParticipantId,
    pub tier: u8,
    pub ratio: f64,
    pub message_key: String,
}

/// Outcome of the consumption rule for one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum InterventionStatus {
    NotReady { reason: String },
    None { ratio: f64 },
    Intervene(InterventionMessage),
}

/// Tier for a consumption ratio (`None` at or below the first threshold).
pub fn tier_for_ratio(ratio: f64, config: &RuleConfig) -> Option<u8> {
    let [t1, t2, t3] = config.tier_thresholds;
    if ratio > t3 {
        Some(3)
    } else if ratio > t2 {
        Some(2)
    } else if ratio > t1 {
        Some(1)
    } else {
        None
    }
}

/// Compares the participant's mean consumption over the last `recent_hours`
/// with the mean over the preceding `baseline_hours` (or the session default
/// baseline when no earlier telemetry exists).
pub fn next_intervention(
    session: &SessionState,
    participant: ParticipantId,
    window: &TelemetryWindow,
    config: &RuleConfig,
) -> Result<InterventionStatus> {
    session.participant(participant)?;
    let not_ready = |reason: &str| Ok(InterventionStatus::NotReady { reason: reason.into() });
    let Some(series) = window.consumption.get(&participant).filter(|s| !s.is_empty()) else {
        return not_ready("no consumption telemetry");
    };
    let last = series.last().expect("nonempty").t;
    let recent: Vec<f64> = series
        .iter()
        .filter(|s| s.t + config.recent_hours > last)
        .map(|s| s.kwh)
        .collect();
    if (recent.len() as u64) < config.recent_hours {
        return not_ready("fewer than a full window of recent consumption samples");
    }
    let earlier: Vec<f64> = series
        .iter()
        .filter(|s| s.t + config.recent_hours <= last && s.t + config.recent_hours + config.baseline_hours > last)
        .map(|s| s.kwh)
        .collect();
    let baseline = if earlier.is_empty() {
        match session.default_baseline_kwh {
            Some(b) => b,
            None => return not_ready("no baseline consumption"),
        }
    } else {
        earlier.iter().sum::<f64>() / earlier.len() as f64
    };
    if !(baseline > 0.0) {
        return not_ready("baseline consumption is zero");
    }
    let ratio = recent.iter().sum::<f64>() / recent.len() as f64 / baseline;
    Ok(match tier_for_ratio(ratio, config) {
        Some(tier) => InterventionStatus::Intervene(InterventionMessage {
            participant_id: participant,
            tier,
            ratio,
            message_key: format!("conserve.tier{tier}"),
        }),
        None => InterventionStatus::None { ratio },
    })
}
