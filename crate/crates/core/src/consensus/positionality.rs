use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};
use crate::intent::IntentGroup;
use crate::ternary::TernaryPoint;

/// Majority and minority weights for a positionality-weighted choice.
pub trait PositionalityStrategy {
    fn weights(&self, n_majority: usize, n_minority: usize, dims_total: u32, dims_respected: u32)
        -> (f64, f64);
}

/// `W_maj = N_maj`, `W_min = N_min * (N_maj / N_min) * (dims_total / dims_respected)`.
///
/// The size ratio cancels the minority's head count, so the minority carries
/// the majority's weight scaled by the dimensionality ratio.
#[derive(Debug, Clone, Copy, Default)]
pub struct RatioWeighting;

impl PositionalityStrategy for RatioWeighting {
    fn weights(&self, n_majority: usize, n_minority: usize, dims_total: u32, dims_respected: u32) -> (f64, f64) {
        let n_maj = n_majority as f64;
        let n_min = n_minority as f64;
        let w_min = n_min * (n_maj / n_min) * (dims_total as f64 / dims_respected as f64);
        (n_maj, w_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialChoiceResult {
    pub target_point: TernaryPoint,
    pub chosen_scenario_id: u64,
    /// (majority weight, minority weight)
    pub weights_used: (f64, f64),
    pub dimension_ratio_used: f64,
}

pub fn positionality_choice(
    majority: &IntentGroup,
    minority: &IntentGroup,
    dims_total: u32,
    dims_respected: u32,
    scenarios: &[(u64, TernaryPoint)],
) -> Result<SocialChoiceResult> {
    positionality_choice_with(&RatioWeighting, majority, minority, dims_total, dims_respected, scenarios)
}

/// Weighted point between the two aggregation points and the scenario nearest
/// to it in the embedding (ties by lowest id).
pub fn positionality_choice_with<S: PositionalityStrategy + ?Sized>(
    strategy: &S,
    majority: &IntentGroup,
    minority: &IntentGroup,
    dims_total: u32,
    dims_respected: u32,
    scenarios: &[(u64, TernaryPoint)],
) -> Result<SocialChoiceResult> {
    if majority.size == 0 || minority.size == 0 {
        return Err(CoosError::domain("group sizes must be >= 1"));
    }
    if dims_respected == 0 || dims_respected > dims_total {
        return Err(CoosError::domain(format!(
            "need 1 <= dims_respected ({dims_respected}) <= dims_total ({dims_total})"
        )));
    }
    if scenarios.is_empty() {
        return Err(CoosError::domain("empty scenario set"));
    }
    let (w_maj, w_min) = strategy.weights(majority.size, minority.size, dims_total, dims_respected);
    if !(w_maj >= 0.0 && w_min >= 0.0 && w_maj + w_min > 0.0) {
        return Err(CoosError::domain("strategy produced invalid weights"));
    }
    let g_maj = majority.aggregation_point.coords();
    let g_min = minority.aggregation_point.coords();
    let total = w_maj + w_min;
    let mut target = [0.0; 3];
    for k in 0..3 {
        target[k] = (w_maj * g_maj[k] + w_min * g_min[k]) / total;
    }
    let target_point = TernaryPoint::from_coords_unchecked(target);

    let mut chosen = scenarios[0];
    let mut best = f64::INFINITY;
    for &(id, p) in scenarios {
        let d = p.distance(&target_point);
        if d < best || (d == best && id < chosen.0) {
            best = d;
            chosen = (id, p);
        }
    }
    Ok(SocialChoiceResult {
        target_point,
        chosen_scenario_id: chosen.0,
        weights_used: (w_maj, w_min),
        dimension_ratio_used: dims_total as f64 / dims_respected as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::tests::group;

    fn pt(a: f64, b: f64, c: f64) -> TernaryPoint {
        TernaryPoint::new(a, b, c).unwrap()
    }

    fn cloud() -> Vec<(u64, TernaryPoint)> {
        vec![
            (0, pt(0.6, 0.2, 0.2)),
            (1, pt(0.31, 0.49, 0.2)),
            (2, pt(0.2, 0.6, 0.2)),
            (3, pt(0.4, 0.4, 0.2)),
        ]
    }

    #[test]
    fn worked_example() {
        let maj = group(0, 7, pt(0.6, 0.2, 0.2));
        let min = group(1, 3, pt(0.2, 0.6, 0.2));
        let r = positionality_choice(&maj, &min, 3, 1, &cloud()).unwrap();
        assert_eq!(r.weights_used, (7.0, 21.0));
        assert!(r.target_point.approx_eq(&pt(0.3, 0.5, 0.2), 1e-12));
        assert_eq!(r.chosen_scenario_id, 1);
        assert_eq!(r.dimension_ratio_used, 3.0);
    }

    #[test]
    fn full_respect_gives_midpoint() {
        let maj = group(0, 9, pt(0.6, 0.2, 0.2));
        let min = group(1, 1, pt(0.2, 0.6, 0.2));
        let r = positionality_choice(&maj, &min, 3, 3, &cloud()).unwrap();
        assert!(r.target_point.approx_eq(&pt(0.4, 0.4, 0.2), 1e-12));
        assert_eq!(r.chosen_scenario_id, 3);
    }

    #[test]
    fn coincident_groups_target_that_point() {
        let p = pt(0.2, 0.3, 0.5);
        let r = positionality_choice(&group(0, 5, p), &group(1, 2, p), 3, 1, &cloud()).unwrap();
        assert!(r.target_point.approx_eq(&p, 1e-12));
    }

    #[test]
    fn nearest_ties_go_to_lowest_id() {
        let p = pt(0.5, 0.3, 0.2);
        let scenarios = vec![(9, p), (4, p)];
        let r = positionality_choice(&group(0, 1, p), &group(1, 1, p), 1, 1, &scenarios).unwrap();
        assert_eq!(r.chosen_scenario_id, 4);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let maj = group(0, 7, pt(0.6, 0.2, 0.2));
        let min = group(1, 3, pt(0.2, 0.6, 0.2));
        assert!(positionality_choice(&maj, &min, 3, 0, &cloud()).is_err());
        assert!(positionality_choice(&maj, &min, 3, 4, &cloud()).is_err());
        assert!(positionality_choice(&maj, &min, 3, 1, &[]).is_err());
    }
}
