use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::point::{Axis, TernaryPoint, CONSTRUCT_TOL};
use crate::error::{CoosError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Min,
    Max,
}

/// Half-plane `x[axis] >= value` (`Min`) or `x[axis] <= value` (`Max`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateBound {
    pub axis: Axis,
    pub kind: BoundKind,
    pub value: f64,
}

impl CoordinateBound {
    pub fn new(axis: Axis, kind: BoundKind, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(CoosError::domain(format!(
                "bound value {value} outside [0, 1]"
            )));
        }
        Ok(CoordinateBound { axis, kind, value })
    }

    pub fn min(axis: Axis, value: f64) -> Self {
        CoordinateBound {
            axis,
            kind: BoundKind::Min,
            value,
        }
    }

    pub fn max(axis: Axis, value: f64) -> Self {
        CoordinateBound {
            axis,
            kind: BoundKind::Max,
            value,
        }
    }

    /// Signed slack; nonnegative inside the half-plane.
    fn slack(&self, p: &TernaryPoint) -> f64 {
        match self.kind {
            BoundKind::Min => p.get(self.axis) - self.value,
            BoundKind::Max => self.value - p.get(self.axis),
        }
    }

    pub fn admits(&self, p: &TernaryPoint) -> bool {
        self.slack(p) >= -CONSTRUCT_TOL
    }
}

/// Convex polygon inside the simplex, stored counterclockwise in the embedding
/// and starting at the lexicographically smallest vertex. An empty vertex list
/// is the empty region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexRegion {
    vertices: Vec<TernaryPoint>,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn lex_cmp(p: &TernaryPoint, q: &TernaryPoint) -> Ordering {
    p.coords()
        .iter()
        .zip(q.coords())
        .map(|(x, y)| x.total_cmp(&y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl SimplexRegion {
    pub fn full() -> Self {
        Self::canonical(Axis::ALL.iter().map(|&a| TernaryPoint::vertex(a)).collect())
    }

    pub fn empty() -> Self {
        SimplexRegion {
            vertices: Vec::new(),
        }
    }

    /// Builds a region from vertices already forming a convex polygon.
    pub fn from_convex(vertices: Vec<TernaryPoint>) -> Result<Self> {
        let region = Self::canonical(vertices);
        let n = region.vertices.len();
        if n >= 3 {
            let pts: Vec<_> = region.vertices.iter().map(|p| p.embed()).collect();
            for i in 0..n {
                if cross(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) < -1e-12 {
                    return Err(CoosError::domain("region vertices are not convex"));
                }
            }
        }
        Ok(region)
    }

    /// Convex hull of a point set (monotone chain in the embedding).
    pub fn convex_hull(points: &[TernaryPoint]) -> Self {
        let mut pts: Vec<TernaryPoint> = points.to_vec();
        pts.sort_by(|p, q| {
            let (px, py) = p.embed();
            let (qx, qy) = q.embed();
            px.total_cmp(&qx).then(py.total_cmp(&qy))
        });
        pts.dedup_by(|p, q| p.approx_eq(q, CONSTRUCT_TOL));
        if pts.len() <= 2 {
            return Self::canonical(pts);
        }
        fn half(iter: impl Iterator<Item = TernaryPoint>) -> Vec<TernaryPoint> {
            let mut chain: Vec<TernaryPoint> = Vec::new();
            for p in iter {
                while chain.len() >= 2
                    && cross(
                        chain[chain.len() - 2].embed(),
                        chain[chain.len() - 1].embed(),
                        p.embed(),
                    ) <= 1e-15
                {
                    chain.pop();
                }
                chain.push(p);
            }
            chain.pop();
            chain
        }
        let mut hull = half(pts.iter().copied());
        hull.extend(half(pts.iter().rev().copied()));
        Self::canonical(hull)
    }

    fn canonical(mut v: Vec<TernaryPoint>) -> Self {
        // drop coincident neighbours, including the wrap-around pair
        v.dedup_by(|p, q| p.approx_eq(q, CONSTRUCT_TOL));
        while v.len() > 1 && v[0].approx_eq(&v[v.len() - 1], CONSTRUCT_TOL) {
            v.pop();
        }
        // drop collinear interior vertices
        if v.len() >= 3 {
            let mut changed = true;
            while changed && v.len() >= 3 {
                changed = false;
                let n = v.len();
                for i in 0..n {
                    let prev = v[(i + n - 1) % n].embed();
                    let cur = v[i].embed();
                    let next = v[(i + 1) % n].embed();
                    if cross(prev, cur, next).abs() < 1e-14 {
                        v.remove(i);
                        changed = true;
                        break;
                    }
                }
            }
            if v.len() == 2 {
                // fully collinear input: keep the two extremes
                v.sort_by(lex_cmp);
            }
        }
        if v.len() >= 3 && Self::signed_area_of(&v) < 0.0 {
            v.reverse();
        }
        if let Some(start) = (0..v.len()).min_by(|&i, &j| lex_cmp(&v[i], &v[j])) {
            v.rotate_left(start);
        }
        SimplexRegion { vertices: v }
    }

    fn signed_area_of(v: &[TernaryPoint]) -> f64 {
        let n = v.len();
        let mut s = 0.0;
        for i in 0..n {
            let (x0, y0) = v[i].embed();
            let (x1, y1) = v[(i + 1) % n].embed();
            s += x0 * y1 - x1 * y0;
        }
        s / 2.0
    }

    pub fn vertices(&self) -> &[TernaryPoint] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Area in the embedding (the full simplex has area `3*sqrt(3)/4`).
    pub fn area(&self) -> f64 {
        if self.vertices.len() < 3 {
            0.0
        } else {
            Self::signed_area_of(&self.vertices).abs()
        }
    }

    pub fn contains(&self, p: &TernaryPoint) -> bool {
        const EPS: f64 = 1e-12;
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0].distance(p) <= EPS,
            2 => {
                let (a, b) = (self.vertices[0].embed(), self.vertices[1].embed());
                let q = p.embed();
                if cross(a, b, q).abs() > EPS {
                    return false;
                }
                let dot = (q.0 - a.0) * (b.0 - a.0) + (q.1 - a.1) * (b.1 - a.1);
                let len2 = (b.0 - a.0).powi(2) + (b.1 - a.1).powi(2);
                dot >= -EPS && dot <= len2 + EPS
            }
            n => {
                let q = p.embed();
                (0..n).all(|i| {
                    cross(self.vertices[i].embed(), self.vertices[(i + 1) % n].embed(), q) >= -EPS
                })
            }
        }
    }

    /// Intersection with a coordinate half-plane (Sutherland-Hodgman, one edge).
    pub fn clip(&self, bound: &CoordinateBound) -> SimplexRegion {
        let n = self.vertices.len();
        if n == 0 {
            return SimplexRegion::empty();
        }
        if n == 1 {
            return if bound.admits(&self.vertices[0]) {
                self.clone()
            } else {
                SimplexRegion::empty()
            };
        }
        let mut out = Vec::with_capacity(n + 2);
        for i in 0..n {
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let (sc, sn) = (bound.slack(&cur), bound.slack(&next));
            let cur_in = sc >= -CONSTRUCT_TOL;
            let next_in = sn >= -CONSTRUCT_TOL;
            if cur_in {
                out.push(cur);
            }
            if cur_in != next_in {
                let t = sc / (sc - sn);
                let mut x = cur.lerp(&next, t).coords();
                // snap the bounded coordinate onto the boundary line
                let k = bound.axis.index();
                let delta = bound.value - x[k];
                x[k] = bound.value;
                let others: Vec<usize> = (0..3).filter(|&j| j != k).collect();
                let mass: f64 = others.iter().map(|&j| x[j]).sum();
                if mass > 0.0 {
                    for &j in &others {
                        x[j] -= delta * x[j] / mass;
                    }
                }
                out.push(TernaryPoint::from_coords_unchecked(x.map(|v| v.max(0.0))));
            }
        }
        Self::canonical(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: f64, b: f64, c: f64) -> TernaryPoint {
        TernaryPoint::new(a, b, c).unwrap()
    }

    fn has_vertex(r: &SimplexRegion, p: &TernaryPoint) -> bool {
        r.vertices().iter().any(|v| v.approx_eq(p, 1e-12))
    }

    #[test]
    fn full_simplex_area() {
        let area = SimplexRegion::full().area();
        assert!((area - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn clip_examples() {
        let full = SimplexRegion::full();

        let corner = full.clip(&CoordinateBound::min(Axis::A, 1.0));
        assert_eq!(corner.vertices().len(), 1);
        assert!(corner.vertices()[0].approx_eq(&TernaryPoint::vertex(Axis::A), 1e-12));
        assert_eq!(corner.area(), 0.0);

        assert_eq!(full.clip(&CoordinateBound::min(Axis::A, 0.0)), full);

        let half = full.clip(&CoordinateBound::min(Axis::A, 0.5));
        assert_eq!(half.vertices().len(), 3);
        for v in [pt(0.5, 0.5, 0.0), pt(1.0, 0.0, 0.0), pt(0.5, 0.0, 0.5)] {
            assert!(has_vertex(&half, &v), "missing {v}");
        }
    }

    #[test]
    fn contradictory_bounds_empty() {
        let r = SimplexRegion::full()
            .clip(&CoordinateBound::min(Axis::A, 0.9))
            .clip(&CoordinateBound::max(Axis::A, 0.1));
        assert!(r.is_empty());
        assert_eq!(r.area(), 0.0);
    }

    #[test]
    fn canonical_order_is_ccw_from_lex_min() {
        let r = SimplexRegion::full();
        let v = r.vertices();
        assert_eq!(v[0], TernaryPoint::vertex(Axis::C));
        let area = SimplexRegion::signed_area_of(v);
        assert!(area > 0.0);
    }

    #[test]
    fn hull_of_collinear_points_is_segment() {
        let pts = [pt(0.6, 0.2, 0.2), pt(0.4, 0.4, 0.2), pt(0.2, 0.6, 0.2)];
        let hull = SimplexRegion::convex_hull(&pts);
        assert_eq!(hull.vertices().len(), 2);
        assert!(hull.contains(&pts[1]));
        assert!(!hull.contains(&pt(0.4, 0.3, 0.3)));
    }

    #[test]
    fn bound_rejects_out_of_range_value() {
        assert!(CoordinateBound::new(Axis::B, BoundKind::Max, 1.5).is_err());
    }
}
