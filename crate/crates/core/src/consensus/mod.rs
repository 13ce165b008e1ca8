//! Consensus geometry between intent groups.
//!
//! Conflict relationships are straight segments from each group's aggregation
//! point to the consensus reference point. Compromise relationships are
//! two-segment bypasses along constant-coordinate lines, so that one value
//! stays fixed on each leg. The candidate region starts as the hull of the two
//! leading groups and their bypass corners and is narrowed by coordinate bounds.

mod paths;
mod positionality;

pub use paths::{compromise_paths, CompromisePath};
pub use positionality::{
    positionality_choice, positionality_choice_with, PositionalityStrategy, RatioWeighting,
    SocialChoiceResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};
use crate::intent::IntentGroup;
use crate::ternary::{centroid, CoordinateBound, Segment, SimplexRegion, TernaryPoint};

/// Compromise paths from one group to another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPairPaths {
    pub from_group: usize,
    pub to_group: usize,
    pub paths: Vec<CompromisePath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusGeometry {
    pub reference_point: TernaryPoint,
    pub conflict_segments: Vec<Segment>,
    pub compromise_paths: Vec<GroupPairPaths>,
    pub candidate_region: SimplexRegion,
    pub applied_constraints: Vec<CoordinateBound>,
}

/// Centroid of group aggregation points, weighted by group size when
/// `size_weighted` (equal to the centroid of all individual points).
pub fn reference_point(groups: &[IntentGroup], size_weighted: bool) -> Result<TernaryPoint> {
    if groups.is_empty() {
        return Err(CoosError::domain("reference point of zero groups"));
    }
    let points: Vec<TernaryPoint> = groups.iter().map(|g| g.aggregation_point).collect();
    if size_weighted {
        let weights: Vec<f64> = groups.iter().map(|g| g.size as f64).collect();
        centroid(&points, Some(&weights))
    } else {
        centroid(&points, None)
    }
}

/// Hull of both aggregation points and every valid bypass corner.
pub fn initial_region(g1: &IntentGroup, g2: &IntentGroup) -> Result<SimplexRegion> {
    let mut pts = vec![g1.aggregation_point, g2.aggregation_point];
    pts.extend(compromise_paths(g1, g2)?.iter().map(|p| p.via));
    Ok(SimplexRegion::convex_hull(&pts))
}

impl ConsensusGeometry {
    /// Geometry for diagnosed groups (ordered majority first). The candidate
    /// region is built from the first two groups.
    pub fn build(groups: &[IntentGroup], size_weighted: bool) -> Result<Self> {
        let reference_point = reference_point(groups, size_weighted)?;
        let conflict_segments = groups
            .iter()
            .map(|g| Segment::new(g.aggregation_point, reference_point, None))
            .collect::<Result<Vec<_>>>()?;
        let mut compromise_paths = Vec::new();
        for (i, g) in groups.iter().enumerate() {
            for (j, h) in groups.iter().enumerate() {
                if i != j {
                    compromise_paths.push(GroupPairPaths {
                        from_group: g.group_id,
                        to_group: h.group_id,
                        paths: paths::compromise_paths(g, h)?,
                    });
                }
            }
        }
        let candidate_region = match groups {
            [only] => SimplexRegion::convex_hull(&[only.aggregation_point]),
            [first, second, ..] => initial_region(first, second)?,
            [] => unreachable!("reference_point rejects empty input"),
        };
        Ok(ConsensusGeometry {
            reference_point,
            conflict_segments,
            compromise_paths,
            candidate_region,
            applied_constraints: Vec::new(),
        })
    }

    /// Clips the candidate region by one more bound; everything else is kept.
    pub fn narrow(&self, bound: CoordinateBound) -> Result<ConsensusGeometry> {
        let bound = CoordinateBound::new(bound.axis, bound.kind, bound.value)?;
        let mut next = self.clone();
        next.candidate_region = self.candidate_region.clip(&bound);
        next.applied_constraints.push(bound);
        Ok(next)
    }

    /// Empty candidate region: the applied bounds admit no common proposal.
    pub fn is_impasse(&self) -> bool {
        self.candidate_region.is_empty()
    }

    pub fn paths_between(&self, from: usize, to: usize) -> Option<&[CompromisePath]> {
        self.compromise_paths
            .iter()
            .find(|p| p.from_group == from && p.to_group == to)
            .map(|p| p.paths.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pclm::ParticipantId;
    use crate::ternary::Axis;

    fn pt(a: f64, b: f64, c: f64) -> TernaryPoint {
        TernaryPoint::new(a, b, c).unwrap()
    }

    pub(crate) fn group(id: usize, size: usize, p: TernaryPoint) -> IntentGroup {
        IntentGroup {
            group_id: id,
            member_ids: (0..size).map(|i| ParticipantId((id * 100 + i) as u64)).collect(),
            aggregation_point: p,
            size,
            is_majority: id == 0,
        }
    }

    #[test]
    fn reference_point_examples() {
        let gs = [group(0, 7, pt(0.6, 0.2, 0.2)), group(1, 3, pt(0.2, 0.6, 0.2))];
        assert!(reference_point(&gs, true).unwrap().approx_eq(&pt(0.48, 0.32, 0.2), 1e-12));
        assert!(reference_point(&gs, false).unwrap().approx_eq(&pt(0.4, 0.4, 0.2), 1e-12));
        assert_eq!(reference_point(&gs[..1], true).unwrap(), gs[0].aggregation_point);
        assert!(reference_point(&[], true).is_err());
    }

    #[test]
    fn conflict_segments_end_at_reference() {
        let gs = [group(0, 7, pt(0.6, 0.2, 0.2)), group(1, 3, pt(0.2, 0.5, 0.3))];
        let geo = ConsensusGeometry::build(&gs, true).unwrap();
        assert_eq!(geo.conflict_segments.len(), 2);
        for s in &geo.conflict_segments {
            assert_eq!(s.end, geo.reference_point);
            assert_eq!(s.held_coordinate, None);
        }
        assert_eq!(geo.paths_between(0, 1).unwrap().len(), 5);
        assert_eq!(geo.paths_between(1, 0).unwrap().len(), 5);
    }

    #[test]
    fn narrowing_examples() {
        let gs = [group(0, 7, pt(0.6, 0.2, 0.2)), group(1, 3, pt(0.2, 0.5, 0.3))];
        let geo = ConsensusGeometry::build(&gs, true).unwrap();

        let same = geo.narrow(CoordinateBound::min(Axis::A, 0.0)).unwrap();
        assert_eq!(same.candidate_region, geo.candidate_region);
        assert_eq!(same.applied_constraints.len(), 1);

        let empty = geo
            .narrow(CoordinateBound::min(Axis::A, 0.9))
            .unwrap()
            .narrow(CoordinateBound::max(Axis::A, 0.1))
            .unwrap();
        assert!(empty.is_impasse());

        let clipped = geo.narrow(CoordinateBound::min(Axis::B, 0.4)).unwrap();
        assert!(clipped.candidate_region.contains(&pt(0.3, 0.5, 0.2)));
        assert!(!clipped.candidate_region.contains(&pt(0.6, 0.2, 0.2)));
        assert!(clipped.candidate_region.area() <= geo.candidate_region.area());
        assert_eq!(clipped.reference_point, geo.reference_point);
    }

    #[test]
    fn initial_region_contains_groups_and_vias() {
        let g1 = group(0, 7, pt(0.6, 0.2, 0.2));
        let g2 = group(1, 3, pt(0.2, 0.5, 0.3));
        let region = initial_region(&g1, &g2).unwrap();
        assert!(region.contains(&g1.aggregation_point));
        assert!(region.contains(&g2.aggregation_point));
        for p in compromise_paths(&g1, &g2).unwrap() {
            assert!(region.contains(&p.via));
        }
    }

    #[test]
    fn single_group_geometry() {
        let gs = [group(0, 4, pt(0.3, 0.3, 0.4))];
        let geo = ConsensusGeometry::build(&gs, true).unwrap();
        assert_eq!(geo.reference_point, gs[0].aggregation_point);
        assert!(geo.compromise_paths.is_empty());
        assert_eq!(geo.candidate_region.vertices().len(), 1);
    }

    #[test]
    fn narrow_rejects_bad_bound() {
        let gs = [group(0, 4, pt(0.3, 0.3, 0.4))];
        let geo = ConsensusGeometry::build(&gs, true).unwrap();
        assert!(geo.narrow(CoordinateBound::max(Axis::A, 2.0)).is_err());
    }
}
