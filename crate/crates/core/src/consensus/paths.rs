use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::intent::IntentGroup;
use crate::ternary::{constant_coordinate_intersection, Axis, Segment, TernaryPoint, CONSTRUCT_TOL};

/// Two-leg bypass from one aggregation point to another: the first leg holds
/// one coordinate of the start point, the second holds a different coordinate
/// of the end point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompromisePath {
    pub segments: [Segment; 2],
    pub via: TernaryPoint,
    pub total_length: f64,
}

impl CompromisePath {
    pub fn held_axes(&self) -> (Axis, Axis) {
        (
            self.segments[0].held_coordinate.expect("first leg is held"),
            self.segments[1].held_coordinate.expect("second leg is held"),
        )
    }
}

/// All in-simplex bypasses over the six ordered axis pairs, shortest first
/// (ties in axis-pair order). Coincident points yield no paths.
pub fn compromise_paths(g1: &IntentGroup, g2: &IntentGroup) -> Result<Vec<CompromisePath>> {
    let (p, q) = (g1.aggregation_point, g2.aggregation_point);
    if p.approx_eq(&q, CONSTRUCT_TOL) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (axis_p, axis_q) in Axis::ordered_pairs() {
        if let Some(via) = constant_coordinate_intersection(&p, axis_p, &q, axis_q)? {
            let first = Segment::new(p, via, Some(axis_p))?;
            let second = Segment::new(via, q, Some(axis_q))?;
            out.push(CompromisePath {
                total_length: first.length() + second.length(),
                segments: [first, second],
                via,
            });
        }
    }
    // stable sort keeps axis-pair order among equal lengths
    out.sort_by(|a, b| a.total_length.total_cmp(&b.total_length));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::tests::group;

    fn pt(a: f64, b: f64, c: f64) -> TernaryPoint {
        TernaryPoint::new(a, b, c).unwrap()
    }

    #[test]
    fn worked_fixture_has_five_paths() {
        let g1 = group(0, 7, pt(0.6, 0.2, 0.2));
        let g2 = group(1, 3, pt(0.2, 0.5, 0.3));
        let paths = compromise_paths(&g1, &g2).unwrap();
        assert_eq!(paths.len(), 5);
        assert!(paths.iter().all(|p| p.held_axes() != (Axis::A, Axis::B)));
        // hand-derived via points per held pair
        let expected = [
            ((Axis::A, Axis::C), pt(0.6, 0.1, 0.3)),
            ((Axis::B, Axis::A), pt(0.2, 0.2, 0.6)),
            ((Axis::B, Axis::C), pt(0.5, 0.2, 0.3)),
            ((Axis::C, Axis::A), pt(0.2, 0.6, 0.2)),
            ((Axis::C, Axis::B), pt(0.3, 0.5, 0.2)),
        ];
        for (axes, via) in expected {
            let path = paths.iter().find(|p| p.held_axes() == axes).unwrap();
            assert!(path.via.approx_eq(&via, 1e-12), "{axes:?}: {}", path.via);
            assert_eq!(path.segments[0].start, g1.aggregation_point);
            assert_eq!(path.segments[1].end, g2.aggregation_point);
        }
        for w in paths.windows(2) {
            assert!(w[0].total_length <= w[1].total_length);
        }
    }

    #[test]
    fn shared_coordinate_gives_collinear_path() {
        let g1 = group(0, 2, pt(0.6, 0.2, 0.2));
        let g2 = group(1, 2, pt(0.3, 0.5, 0.2));
        let paths = compromise_paths(&g1, &g2).unwrap();
        let collinear = paths.iter().any(|p| {
            p.segments
                .iter()
                .all(|s| (s.start.c() - 0.2).abs() < 1e-12 && (s.end.c() - 0.2).abs() < 1e-12)
        });
        assert!(collinear);
    }

    #[test]
    fn coincident_points_have_no_paths() {
        let p = pt(0.3, 0.3, 0.4);
        assert!(compromise_paths(&group(0, 1, p), &group(1, 1, p)).unwrap().is_empty());
    }
}
