use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::PreferenceModel;
use super::select::select_question;
use super::{ComparisonResponse, ParticipantId, ScenarioCloud, Winner};
use crate::error::Result;
use crate::ternary::TernaryPoint;

/// Noiseless synthetic participant: prefers the higher `w . x`, flips a seeded
/// coin on exact ties.
#[derive(Debug, Clone)]
pub struct SimulatedResponder {
    weights: TernaryPoint,
    rng: ChaCha8Rng,
}

impl SimulatedResponder {
    pub fn new(weights: TernaryPoint, seed: u64) -> Self {
        SimulatedResponder {
            weights,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn weights(&self) -> TernaryPoint {
        self.weights
    }

    pub fn answer(&mut self, xa: [f64; 3], xb: [f64; 3]) -> Winner {
        let sa = self.weights.dot(xa);
        let sb = self.weights.dot(xb);
        if sa > sb {
            Winner::A
        } else if sb > sa {
            Winner::B
        } else if self.rng.gen_bool(0.5) {
            Winner::A
        } else {
            Winner::B
        }
    }
}

/// Adaptive questioning loop until convergence, `max_questions`, or pool exhaustion.
pub fn run_adaptive(
    participant: ParticipantId,
    cloud: &ScenarioCloud,
    responder: &mut SimulatedResponder,
    max_questions: usize,
    seed: u64,
) -> Result<PreferenceModel> {
    let mut model = PreferenceModel::new(participant);
    let mut asked = BTreeSet::new();
    for q in 0..max_questions {
        if model.estimate().converged {
            break;
        }
        let Some((a, b)) = select_question(&model, cloud, &asked, seed)? else {
            break;
        };
        let winner = responder.answer(cloud.get(a)?, cloud.get(b)?);
        model.apply(
            &ComparisonResponse {
                question_id: q as u64,
                scenario_a_id: a,
                scenario_b_id: b,
                winner,
                timestamp: q as u64,
            },
            cloud,
        )?;
        asked.insert((a, b));
    }
    Ok(model)
}
