//! Paired-comparison preference learning.
//!
//! A participant's value weights `w` live on the simplex; a scenario with
//! normalized value triple `x` (social, environmental, economic in `[0, 1]`)
//! scores `w . x`. Answers follow a logistic response model
//! `P(A beats B | w) = logistic(beta * w . (x_A - x_B))`, and the posterior is
//! kept exactly on a fixed triangular grid of weight triples.
//!
//! Scores use the normalized triple rather than its simplex projection: the
//! projection sums to one, which makes every `w` on a ray from the simplex
//! center rank scenarios identically and leaves the weights unidentifiable.

mod grid;
mod model;
mod responder;
mod select;

pub use grid::SimplexGrid;
pub use model::{Estimate, PreferenceModel, PreferenceSummary, BETA, CONVERGED_DIAMETER, MAX_QUESTIONS};
pub use responder::{run_adaptive, SimulatedResponder};
pub use select::{select_question, CANDIDATE_POOL};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};
use crate::sim::Scenario;
use crate::ternary::TernaryPoint;

pub const RESPONSE_FORMAT: &str = "coos-responses";
pub const RESPONSE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticipantId(pub u64);

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for ParticipantId {
    type Err = CoosError;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse()
            .map(ParticipantId)
            .map_err(|_| CoosError::domain(format!("invalid participant id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonResponse {
    pub question_id: u64,
    pub scenario_a_id: u64,
    pub scenario_b_id: u64,
    pub winner: Winner,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

impl ComparisonResponse {
    /// Unordered pair key `(min id, max id)`.
    pub fn pair(&self) -> (u64, u64) {
        let (a, b) = (self.scenario_a_id, self.scenario_b_id);
        (a.min(b), a.max(b))
    }
}

/// Scenario id to value-triple lookup used for questioning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioCloud {
    features: BTreeMap<u64, [f64; 3]>,
    ids: Vec<u64>,
}

impl ScenarioCloud {
    pub fn new(features: impl IntoIterator<Item = (u64, [f64; 3])>) -> Self {
        let features: BTreeMap<u64, [f64; 3]> = features.into_iter().collect();
        let ids = features.keys().copied().collect();
        ScenarioCloud { features, ids }
    }

    /// Cloud of normalized scenarios; fails if any scenario is not normalized.
    pub fn from_scenarios(scenarios: &[Scenario]) -> Result<Self> {
        let mut features = BTreeMap::new();
        for s in scenarios {
            let x = s.normalized.ok_or_else(|| {
                CoosError::domain(format!("scenario {} has not been normalized", s.id))
            })?;
            features.insert(s.id, x);
        }
        Ok(Self::new(features))
    }

    pub fn get(&self, id: u64) -> Result<[f64; 3]> {
        self.features
            .get(&id)
            .copied()
            .ok_or_else(|| CoosError::not_found("scenario", id))
    }

    /// Ternary projection of a scenario's value triple.
    pub fn point(&self, id: u64) -> Result<TernaryPoint> {
        crate::ternary::to_ternary(self.get(id)?)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Sorted scenario ids.
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, [f64; 3])> + '_ {
        self.features.iter().map(|(&id, &x)| (id, x))
    }
}

/// One line of a response log file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedResponse {
    pub participant_id: ParticipantId,
    #[serde(flatten)]
    pub response: ComparisonResponse,
}

pub fn write_response_log(path: &std::path::Path, log: &[LoggedResponse]) -> Result<()> {
    crate::jsonl::write_file(path, RESPONSE_FORMAT, RESPONSE_VERSION, log)
}

pub fn read_response_log(path: &std::path::Path) -> Result<Vec<LoggedResponse>> {
    crate::jsonl::read_file(path, RESPONSE_FORMAT, RESPONSE_VERSION)
}
