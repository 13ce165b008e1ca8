//! Standard boards shared by the CLI, the service and the C interface: the
//! scenario cloud and the consensus geometry.

use crate::consensus::{ConsensusGeometry, SocialChoiceResult};
use crate::intent::IntentGroup;
use crate::ternary::svg::{LineStyle, PointStyle, TernaryBoard};
use crate::ternary::TernaryPoint;

const MAJORITY: &str = "#c0392b";
const MINORITY: &str = "#2471a3";
const OTHER_GROUP: &str = "#7d3c98";
const REGION: &str = "#909497";

/// Every scenario as a small dot.
pub fn scenario_cloud(points: &[(u64, TernaryPoint)], title: &str) -> String {
    let mut board = TernaryBoard::new().title(title);
    for (_, p) in points {
        board.point(*p, PointStyle::new("#1f618d", 1.2));
    }
    board.render()
}

/// Groups, reference point, conflict segments, candidate region, compromise
/// paths between the two largest groups (shortest solid, the rest dashed) and,
/// when given, the social-choice target.
pub fn consensus(
    groups: &[IntentGroup],
    geometry: &ConsensusGeometry,
    choice: Option<&SocialChoiceResult>,
) -> String {
    let mut board = TernaryBoard::new().title("Consensus board");
    board.region(&geometry.candidate_region, REGION);
    for seg in &geometry.conflict_segments {
        board.segment(*seg, LineStyle::dashed("#566573", 1.0));
    }
    if let [first, second, ..] = groups {
        if let Some(paths) = geometry.paths_between(first.group_id, second.group_id) {
            for (i, path) in paths.iter().enumerate() {
                let style = if i == 0 {
                    LineStyle::solid("#1e8449", 2.0)
                } else {
                    LineStyle::dashed("#52be80", 1.0)
                };
                for seg in path.segments {
                    board.segment(seg, style.clone());
                }
            }
        }
    }
    for (i, g) in groups.iter().enumerate() {
        let fill = match i {
            0 => MAJORITY,
            1 => MINORITY,
            _ => OTHER_GROUP,
        };
        let radius = 4.0 + (g.size as f64).sqrt();
        board.point(
            g.aggregation_point,
            PointStyle::new(fill, radius).labeled(format!("G{} ({})", g.group_id, g.size)),
        );
    }
    board.point(geometry.reference_point, PointStyle::new("black", 4.0).labeled("reference"));
    if let Some(c) = choice {
        board.point(c.target_point, PointStyle::new("#f1c40f", 5.0).labeled("target"));
    }
    board.render()
}
