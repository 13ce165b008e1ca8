//! Group intention diagnostics: cluster participants' preference points and
//! label the largest group as the majority.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};
use crate::pclm::ParticipantId;
use crate::ternary::{centroid, TernaryPoint};

pub const MAX_GROUPS: usize = 5;
/// Minimum mean silhouette for accepting more than one group.
pub const SILHOUETTE_FLOOR: f64 = 0.25;
const RESTARTS: usize = 8;
const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentGroup {
    pub group_id: usize,
    pub member_ids: Vec<ParticipantId>,
    pub aggregation_point: TernaryPoint,
    pub size: usize,
    pub is_majority: bool,
}

type P2 = (f64, f64);

fn dist(p: P2, q: P2) -> f64 {
    (p.0 - q.0).hypot(p.1 - q.1)
}

fn nearest(p: P2, centers: &[P2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist(p, *c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn kmeans_once(points: &[P2], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    // k-means++ seeding
    let mut centers = vec![points[rng.gen_range(0..points.len())]];
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|&p| {
                let d = dist(p, centers[nearest(p, &centers)]);
                d * d
            })
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            centers.push(points[rng.gen_range(0..points.len())]);
            continue;
        }
        let mut target = rng.gen::<f64>() * total;
        let mut pick = points.len() - 1;
        for (i, d) in d2.iter().enumerate() {
            if target < *d {
                pick = i;
                break;
            }
            target -= d;
        }
        centers.push(points[pick]);
    }

    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, &p) in points.iter().enumerate() {
            let l = nearest(p, &centers);
            if labels[i] != l {
                labels[i] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l].0 += p.0;
            sums[l].1 += p.1;
            sums[l].2 += 1;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s.2 > 0 {
                *c = (s.0 / s.2 as f64, s.1 / s.2 as f64);
            }
        }
    }
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(&p, &l)| dist(p, centers[l]).powi(2))
        .sum();
    (labels, inertia)
}

fn kmeans(points: &[P2], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..RESTARTS {
        let run = kmeans_once(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    best.map(|b| b.0).unwrap_or_default()
}

/// Mean silhouette; singleton clusters score 0.
pub fn silhouette(points: &[P2], labels: &[usize]) -> f64 {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for (i, &p) in points.iter().enumerate() {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (j, &q) in points.iter().enumerate() {
            if i != j {
                sums[labels[j]] += dist(p, q);
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / points.len() as f64
}

fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Clusters preference points into intent groups ordered by size (descending,
/// ties by lowest member id); the first group is the majority.
pub fn diagnose(
    points: &BTreeMap<ParticipantId, TernaryPoint>,
    seed: u64,
) -> Result<Vec<IntentGroup>> {
    if points.is_empty() {
        return Err(CoosError::domain("no participant preference points to diagnose"));
    }
    let ids: Vec<ParticipantId> = points.keys().copied().collect();
    let tern: Vec<TernaryPoint> = points.values().copied().collect();
    let emb: Vec<P2> = tern.iter().map(|p| p.embed()).collect();

    let mut labels = vec![0usize; emb.len()];
    if emb.len() >= 4 {
        let mut best: Option<f64> = None;
        for k in 2..=MAX_GROUPS.min(emb.len() - 1) {
            let (cand, used) = relabel(&kmeans(&emb, k, seed));
            if used < 2 {
                continue;
            }
            let score = silhouette(&emb, &cand);
            // smaller k wins ties
            if score >= SILHOUETTE_FLOOR && best.is_none_or(|b| score > b) {
                best = Some(score);
                labels = cand;
            }
        }
    }

    let (labels, k) = relabel(&labels);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut groups = members
        .into_iter()
        .map(|idx| {
            let pts: Vec<TernaryPoint> = idx.iter().map(|&i| tern[i]).collect();
            Ok(IntentGroup {
                group_id: 0,
                member_ids: idx.iter().map(|&i| ids[i]).collect(),
                aggregation_point: centroid(&pts, None)?,
                size: idx.len(),
                is_majority: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    groups.sort_by(|g, h| h.size.cmp(&g.size).then(g.member_ids[0].cmp(&h.member_ids[0])));
    for (i, g) in groups.iter_mut().enumerate() {
        g.group_id = i;
        g.is_majority = i == 0;
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: f64, b: f64, c: f64) -> TernaryPoint {
        TernaryPoint::new(a, b, c).unwrap()
    }

    fn around(center: TernaryPoint, r: f64, n: usize, phase: f64) -> Vec<TernaryPoint> {
        let (cx, cy) = center.embed();
        (0..n)
            .map(|i| {
                let t = phase + i as f64 * 2.399_963;
                let rr = r * ((i as f64 + 0.5) / n as f64).sqrt();
                let c = crate::ternary::unembed(cx + rr * t.cos(), cy + rr * t.sin());
                TernaryPoint::new(c[0], c[1], c[2]).unwrap()
            })
            .collect()
    }

    fn map_of(points: Vec<TernaryPoint>) -> BTreeMap<ParticipantId, TernaryPoint> {
        points
            .into_iter()
            .enumerate()
            .map(|(i, p)| (ParticipantId(i as u64 + 1), p))
            .collect()
    }

    #[test]
    fn two_clear_clusters() {
        let g_maj = pt(0.6, 0.2, 0.2);
        let g_min = pt(0.2, 0.6, 0.2);
        let mut pts = around(g_maj, 0.05, 7, 0.0);
        pts.extend(around(g_min, 0.05, 3, 1.0));
        let groups = diagnose(&map_of(pts.clone()), 0).unwrap();
        assert_eq!(groups.len(), 2);
        assert!(groups[0].is_majority && !groups[1].is_majority);
        assert_eq!(groups[0].size, 7);
        assert_eq!(groups[1].size, 3);
        // centroid oracle over the constructed members
        let expected = centroid(&pts[..7], None).unwrap();
        assert!(groups[0].aggregation_point.approx_eq(&expected, 1e-12));
        assert!(groups[0].aggregation_point.distance(&g_maj) < 0.05);
    }

    #[test]
    fn identical_points_form_one_group() {
        let p = pt(0.3, 0.3, 0.4);
        let groups = diagnose(&map_of(vec![p; 6]), 3).unwrap();
        assert_eq!(groups.len(), 1);
        assert!(groups[0].is_majority);
        assert!(groups[0].aggregation_point.approx_eq(&p, 1e-12));
    }

    #[test]
    fn singleton_is_majority() {
        let groups = diagnose(&map_of(vec![pt(0.1, 0.2, 0.7)]), 0).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].size, 1);
        assert!(groups[0].is_majority);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(diagnose(&BTreeMap::new(), 0).is_err());
    }

    #[test]
    fn majority_tie_goes_to_lowest_member() {
        let mut pts = around(pt(0.1, 0.1, 0.8), 0.02, 3, 0.0);
        pts.extend(around(pt(0.8, 0.1, 0.1), 0.02, 3, 0.5));
        let mut m = map_of(pts);
        // relabel so the second cluster holds the lowest id
        let moved: Vec<_> = m.iter().map(|(id, p)| (ParticipantId(100 - id.0), *p)).collect();
        m = moved.into_iter().collect();
        let groups = diagnose(&m, 0).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].member_ids[0], ParticipantId(94));
    }
}
