use super::Scenario;
use crate::error::{CoosError, Result};
use crate::ternary::to_ternary;

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn scale(v: f64, lo: f64, hi: f64, invert: bool) -> f64 {
    if hi <= lo {
        return 0.5;
    }
    let x = if invert {
        (hi - v) / (hi - lo)
    } else {
        (v - lo) / (hi - lo)
    };
    x.clamp(0.0, 1.0)
}

/// Min-max normalizes each index over the set (cost inverted so larger is
/// better, constant columns map to 0.5) and projects onto the simplex.
pub fn normalize_set(scenarios: &[Scenario]) -> Result<Vec<Scenario>> {
    if scenarios.is_empty() {
        return Err(CoosError::domain("cannot normalize an empty scenario set"));
    }
    let (s_lo, s_hi) = min_max(scenarios.iter().map(|s| s.raw.social));
    let (e_lo, e_hi) = min_max(scenarios.iter().map(|s| s.raw.environmental));
    let (c_lo, c_hi) = min_max(scenarios.iter().map(|s| s.raw.economic_cost));
    scenarios
        .iter()
        .map(|s| {
            let normalized = [
                scale(s.raw.social, s_lo, s_hi, false),
                scale(s.raw.environmental, e_lo, e_hi, false),
                scale(s.raw.economic_cost, c_lo, c_hi, true),
            ];
            let mut out = s.clone();
            out.point = Some(to_ternary(normalized)?);
            out.normalized = Some(normalized);
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{evaluate_scenario, CommunityParams};

    fn with_raw(social: f64, environmental: f64, cost: f64) -> Scenario {
        let mut s = evaluate_scenario(&CommunityParams::default()).unwrap();
        s.raw.social = social;
        s.raw.environmental = environmental;
        s.raw.economic_cost = cost;
        s
    }

    #[test]
    fn cheapest_scenario_scores_one() {
        let set: Vec<_> = [100.0, 200.0, 300.0]
            .iter()
            .map(|&c| with_raw(0.1, 0.2, c))
            .collect();
        let out = normalize_set(&set).unwrap();
        assert_eq!(out[0].normalized.unwrap()[2], 1.0);
        assert_eq!(out[1].normalized.unwrap()[2], 0.5);
        assert_eq!(out[2].normalized.unwrap()[2], 0.0);
    }

    #[test]
    fn constant_column_maps_to_half() {
        let set = vec![with_raw(0.1, 0.4, 100.0), with_raw(0.3, 0.4, 200.0)];
        let out = normalize_set(&set).unwrap();
        for s in &out {
            assert_eq!(s.normalized.unwrap()[1], 0.5);
        }
    }

    #[test]
    fn point_is_projected_normalized_triple() {
        // social spans [0, 1], env constant, cost spans [100, 200]
        let set = vec![
            with_raw(0.0, 0.4, 200.0),
            with_raw(1.0, 0.4, 100.0),
            with_raw(0.2, 0.4, 150.0),
        ];
        let out = normalize_set(&set).unwrap();
        let n = out[2].normalized.unwrap();
        assert!((n[0] - 0.2).abs() < 1e-15 && n[1] == 0.5 && (n[2] - 0.5).abs() < 1e-15);
        let p = out[2].point.unwrap();
        assert!((p.a() - 0.2 / 1.2).abs() < 1e-15);
        assert!((p.a() + p.b() + p.c() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_set_rejected() {
        assert!(normalize_set(&[]).is_err());
    }
}
