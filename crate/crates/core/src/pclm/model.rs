use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::SimplexGrid;
use super::{ComparisonResponse, ParticipantId, ScenarioCloud, Winner};
use crate::error::{CoosError, Result};
use crate::ternary::TernaryPoint;

/// Response sharpness of the logistic likelihood.
pub const BETA: f64 = 10.0;
/// Credible mass used for the region diameter.
pub const CREDIBLE_MASS: f64 = 0.9;
pub const CONVERGED_DIAMETER: f64 = 0.1;
pub const MAX_QUESTIONS: usize = 30;

/// `ln(logistic(z))`, stable for large `|z|`.
pub(crate) fn log_logistic(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Grid posterior over a participant's value weights.
#[derive(Debug, Clone)]
pub struct PreferenceModel {
    participant_id: ParticipantId,
    grid: Arc<SimplexGrid>,
    beta: f64,
    // unnormalized log posterior
    log_weights: Vec<f64>,
    posterior: Vec<f64>,
    responses: Vec<ComparisonResponse>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub map_estimate: TernaryPoint,
    pub credible_region_diameter: f64,
    pub converged: bool,
}

/// Serializable view of a model (what the service and CLI report).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceSummary {
    pub participant_id: ParticipantId,
    pub map_estimate: TernaryPoint,
    pub credible_region_diameter: f64,
    pub converged: bool,
    pub responses: usize,
}

impl PreferenceModel {
    /// Uniform prior on the standard grid.
    pub fn new(participant_id: ParticipantId) -> Self {
        Self::with_grid(participant_id, SimplexGrid::standard(), BETA)
    }

    pub fn with_grid(participant_id: ParticipantId, grid: Arc<SimplexGrid>, beta: f64) -> Self {
        let n = grid.len();
        PreferenceModel {
            participant_id,
            grid,
            beta,
            log_weights: vec![0.0; n],
            posterior: vec![1.0 / n as f64; n],
            responses: Vec::new(),
        }
    }

    /// Model with an explicit posterior (normalized here). No responses.
    pub fn with_posterior(
        participant_id: ParticipantId,
        grid: Arc<SimplexGrid>,
        mass: Vec<f64>,
    ) -> Result<Self> {
        if mass.len() != grid.len() {
            return Err(CoosError::domain(format!(
                "posterior has {} entries for a grid of {}",
                mass.len(),
                grid.len()
            )));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(CoosError::domain("posterior mass must be finite and nonnegative"));
        }
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            return Err(CoosError::domain("posterior mass sums to zero"));
        }
        let log_weights = mass.iter().map(|m| (m / total).ln()).collect();
        let posterior = mass.iter().map(|m| m / total).collect();
        Ok(PreferenceModel {
            participant_id,
            grid,
            beta: BETA,
            log_weights,
            posterior,
            responses: Vec::new(),
        })
    }

    /// Rebuilds a model by replaying a response log.
    pub fn replay(
        participant_id: ParticipantId,
        responses: &[ComparisonResponse],
        cloud: &ScenarioCloud,
    ) -> Result<Self> {
        let mut model = Self::new(participant_id);
        for r in responses {
            model.apply(r, cloud)?;
        }
        Ok(model)
    }

    pub fn participant_id(&self) -> ParticipantId {
        self.participant_id
    }

    pub fn grid(&self) -> &SimplexGrid {
        &self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn responses(&self) -> &[ComparisonResponse] {
        &self.responses
    }

    /// Bayesian update returning a new model.
    pub fn posterior_update(
        &self,
        response: &ComparisonResponse,
        cloud: &ScenarioCloud,
    ) -> Result<PreferenceModel> {
        let mut next = self.clone();
        next.apply(response, cloud)?;
        Ok(next)
    }

    /// In-place form of [`posterior_update`](Self::posterior_update).
    pub fn apply(&mut self, response: &ComparisonResponse, cloud: &ScenarioCloud) -> Result<()> {
        if response.scenario_a_id == response.scenario_b_id {
            return Err(CoosError::domain("a comparison needs two distinct scenarios"));
        }
        let xa = cloud.get(response.scenario_a_id)?;
        let xb = cloud.get(response.scenario_b_id)?;
        let sign = match response.winner {
            Winner::A => 1.0,
            Winner::B => -1.0,
        };
        let diff = [
            sign * (xa[0] - xb[0]),
            sign * (xa[1] - xb[1]),
            sign * (xa[2] - xb[2]),
        ];
        for (lw, w) in self.log_weights.iter_mut().zip(self.grid.nodes()) {
            let z = self.beta * (w[0] * diff[0] + w[1] * diff[1] + w[2] * diff[2]);
            *lw += log_logistic(z);
        }
        self.renormalize();
        self.responses.push(*response);
        Ok(())
    }

    fn renormalize(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, lw) in self.posterior.iter_mut().zip(&self.log_weights) {
            *p = (lw - max).exp();
            total += *p;
        }
        for p in &mut self.posterior {
            *p /= total;
        }
    }

    pub fn posterior_mean(&self) -> [f64; 3] {
        let mut mean = [0.0; 3];
        for (p, w) in self.posterior.iter().zip(self.grid.nodes()) {
            for k in 0..3 {
                mean[k] += p * w[k];
            }
        }
        mean
    }

    /// Highest-mass node; when the maximum is shared, the posterior mean.
    pub fn map_estimate(&self) -> TernaryPoint {
        let max = self.posterior.iter().copied().fold(0.0, f64::max);
        let cutoff = max * (1.0 - 1e-12);
        let mut best = None;
        let mut ties = 0usize;
        for (i, &p) in self.posterior.iter().enumerate() {
            if p >= cutoff {
                ties += 1;
                best.get_or_insert(i);
            }
        }
        let coords = match (ties, best) {
            (1, Some(i)) => self.grid.nodes()[i],
            _ => {
                let m = self.posterior_mean();
                let s: f64 = m.iter().sum();
                [m[0] / s, m[1] / s, m[2] / s]
            }
        };
        TernaryPoint::from_coords_unchecked(coords)
    }

    /// L1 diameter of the smallest node set holding `mass` of the posterior.
    pub fn credible_diameter(&self, mass: f64) -> f64 {
        let mut order: Vec<usize> = (0..self.posterior.len()).collect();
        order.sort_by(|&i, &j| self.posterior[j].total_cmp(&self.posterior[i]).then(i.cmp(&j)));
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut acc = 0.0;
        for i in order {
            let w = self.grid.nodes()[i];
            for k in 0..3 {
                lo[k] = lo[k].min(w[k]);
                hi[k] = hi[k].max(w[k]);
            }
            acc += self.posterior[i];
            if acc >= mass {
                break;
            }
        }
        // On the simplex the L1 distance is twice the largest coordinate gap.
        (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max) * 2.0
    }

    pub fn estimate(&self) -> Estimate {
        let credible_region_diameter = self.credible_diameter(CREDIBLE_MASS);
        Estimate {
            map_estimate: self.map_estimate(),
            credible_region_diameter,
            converged: credible_region_diameter < CONVERGED_DIAMETER
                || self.responses.len() >= MAX_QUESTIONS,
        }
    }

    pub fn summary(&self) -> PreferenceSummary {
        let e = self.estimate();
        PreferenceSummary {
            participant_id: self.participant_id,
            map_estimate: e.map_estimate,
            credible_region_diameter: e.credible_region_diameter,
            converged: e.converged,
            responses: self.responses.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp(a: u64, b: u64, winner: Winner) -> ComparisonResponse {
        ComparisonResponse {
            question_id: 0,
            scenario_a_id: a,
            scenario_b_id: b,
            winner,
            timestamp: 0,
        }
    }

    #[test]
    fn prior_is_centered_and_unconverged() {
        let m = PreferenceModel::new(ParticipantId(1));
        let e = m.estimate();
        assert!(e.map_estimate.approx_eq(&TernaryPoint::CENTER, 1e-12));
        assert!(!e.converged);
        assert!((m.posterior().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((e.credible_region_diameter - 2.0).abs() < 0.05);
    }

    #[test]
    fn indistinguishable_pair_leaves_posterior_unchanged() {
        let x = [0.2, 0.3, 0.5];
        let cloud = ScenarioCloud::new([(0, x), (1, x)]);
        let m0 = PreferenceModel::new(ParticipantId(1));
        let m1 = m0.posterior_update(&resp(0, 1, Winner::A), &cloud).unwrap();
        for (x, y) in m0.posterior().iter().zip(m1.posterior()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(m1.responses().len(), 1);
    }

    #[test]
    fn unknown_scenario_rejected() {
        let cloud = ScenarioCloud::new([(0, [0.5; 3])]);
        let m = PreferenceModel::new(ParticipantId(1));
        assert!(m.posterior_update(&resp(0, 9, Winner::A), &cloud).is_err());
    }

    #[test]
    fn win_shifts_mass_toward_winning_axis() {
        // x_A - x_B = (d, -d, 0): A wins => more mass where w_a > w_b.
        let d = 0.2;
        let cloud = ScenarioCloud::new([(0, [0.4 + d, 0.4 - d, 0.2]), (1, [0.4, 0.4, 0.2])]);
        let m = PreferenceModel::new(ParticipantId(1))
            .posterior_update(&resp(0, 1, Winner::A), &cloud)
            .unwrap();
        // brute-force grid summation
        let (mut above, mut below) = (0.0, 0.0);
        for (p, w) in m.posterior().iter().zip(m.grid().nodes()) {
            if w[0] > w[1] {
                above += p;
            } else if w[0] < w[1] {
                below += p;
            }
        }
        assert!(above > below, "{above} <= {below}");
    }

    #[test]
    fn opposite_answers_give_a_symmetric_factor() {
        // Two opposite answers multiply the prior by logistic(z) * logistic(-z),
        // an even function of z. With x_A - x_B = (d, -d, 0) the posterior is
        // therefore mirror-symmetric in (w_a, w_b) and its MAP stays on the
        // indifference line w_a = w_b through the prior MAP.
        let cloud = ScenarioCloud::new([(0, [0.5, 0.3, 0.2]), (1, [0.3, 0.5, 0.2])]);
        let m = PreferenceModel::new(ParticipantId(1))
            .posterior_update(&resp(0, 1, Winner::A), &cloud)
            .unwrap()
            .posterior_update(&resp(0, 1, Winner::B), &cloud)
            .unwrap();
        let grid = m.grid();
        let n = grid.divisions() as usize;
        let index = |i: usize, j: usize| -> usize {
            // row-major over i then j with j in 0..=n-i
            (0..i).map(|r| n - r + 1).sum::<usize>() + j
        };
        for i in 0..=n {
            for j in 0..=(n - i) {
                let a = m.posterior()[index(i, j)];
                let b = m.posterior()[index(j, i)];
                assert!((a - b).abs() <= 1e-15 * a.max(b).max(1e-300));
            }
        }
        let map = m.map_estimate();
        assert!((map.a() - map.b()).abs() < 1e-12);
        let prior_map = PreferenceModel::new(ParticipantId(1)).map_estimate();
        assert!((prior_map.a() - prior_map.b()).abs() < 1e-12);
    }

    #[test]
    fn point_mass_has_zero_diameter() {
        let grid = SimplexGrid::standard();
        let mut mass = vec![0.0; grid.len()];
        mass[1234] = 1.0;
        let m = PreferenceModel::with_posterior(ParticipantId(3), grid.clone(), mass).unwrap();
        let e = m.estimate();
        assert_eq!(e.credible_region_diameter, 0.0);
        assert!(e.converged);
        assert_eq!(e.map_estimate.coords(), grid.nodes()[1234]);
    }

    #[test]
    fn log_logistic_is_stable() {
        assert!((log_logistic(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_logistic(800.0) == 0.0 || log_logistic(800.0).abs() < 1e-300);
        assert!((log_logistic(-800.0) + 800.0).abs() < 1e-9);
    }
}
