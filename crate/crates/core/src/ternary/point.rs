use std::fmt;

use serde::{Deserialize, Serialize};

use super::embed;
use crate::error::{CoosError, Result};

/// Tolerance for simplex invariant checks.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Tolerance for equalities that hold by construction.
pub const CONSTRUCT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    A,
    B,
    C,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::A, Axis::B, Axis::C];

    pub fn index(self) -> usize {
        match self {
            Axis::A => 0,
            Axis::B => 1,
            Axis::C => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    /// Every ordered pair of distinct axes, lexicographic.
    pub fn ordered_pairs() -> [(Axis, Axis); 6] {
        use Axis::*;
        [(A, B), (A, C), (B, A), (B, C), (C, A), (C, B)]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::A => "A",
            Axis::B => "B",
            Axis::C => "C",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Axis {
    type Err = CoosError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" | "social" => Ok(Axis::A),
            "B" | "b" | "environmental" => Ok(Axis::B),
            "C" | "c" | "economic" => Ok(Axis::C),
            other => Err(CoosError::domain(format!("unknown axis {other:?}"))),
        }
    }
}

/// A point of the 2-simplex: nonnegative shares summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct TernaryPoint {
    coords: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    a: f64,
    b: f64,
    c: f64,
}

impl TryFrom<RawPoint> for TernaryPoint {
    type Error = CoosError;

    fn try_from(raw: RawPoint) -> Result<Self> {
        TernaryPoint::new(raw.a, raw.b, raw.c)
    }
}

impl From<TernaryPoint> for RawPoint {
    fn from(p: TernaryPoint) -> Self {
        RawPoint {
            a: p.coords[0],
            b: p.coords[1],
            c: p.coords[2],
        }
    }
}

impl TernaryPoint {
    pub const CENTER: TernaryPoint = TernaryPoint {
        coords: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    };

    /// Validating constructor; the triple must already lie on the simplex.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let coords = [a, b, c];
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(CoosError::domain("non-finite ternary coordinate"));
        }
        if coords.iter().any(|&v| v < -CONSTRUCT_TOL) {
            return Err(CoosError::domain(format!(
                "negative ternary coordinate in ({a}, {b}, {c})"
            )));
        }
        if (a + b + c - 1.0).abs() > SIMPLEX_TOL {
            return Err(CoosError::domain(format!(
                "ternary coordinates ({a}, {b}, {c}) do not sum to 1"
            )));
        }
        Ok(TernaryPoint { coords })
    }

    pub fn vertex(axis: Axis) -> Self {
        let mut coords = [0.0; 3];
        coords[axis.index()] = 1.0;
        TernaryPoint { coords }
    }

    /// Unchecked construction for values that are on the simplex by construction.
    pub(crate) fn from_coords_unchecked(coords: [f64; 3]) -> Self {
        TernaryPoint { coords }
    }

    pub fn a(&self) -> f64 {
        self.coords[0]
    }

    pub fn b(&self) -> f64 {
        self.coords[1]
    }

    pub fn c(&self) -> f64 {
        self.coords[2]
    }

    pub fn get(&self, axis: Axis) -> f64 {
        self.coords[axis.index()]
    }

    pub fn coords(&self) -> [f64; 3] {
        self.coords
    }

    pub fn embed(&self) -> (f64, f64) {
        embed(self.coords)
    }

    pub fn distance(&self, other: &TernaryPoint) -> f64 {
        let (x0, y0) = self.embed();
        let (x1, y1) = other.embed();
        (x1 - x0).hypot(y1 - y0)
    }

    pub fn l1(&self, other: &TernaryPoint) -> f64 {
        self.coords
            .iter()
            .zip(other.coords)
            .map(|(x, y)| (x - y).abs())
            .sum()
    }

    pub fn dot(&self, raw: [f64; 3]) -> f64 {
        self.coords.iter().zip(raw).map(|(x, y)| x * y).sum()
    }

    /// Whether every coordinate agrees with `other` within `tol`.
    pub fn approx_eq(&self, other: &TernaryPoint, tol: f64) -> bool {
        self.coords
            .iter()
            .zip(other.coords)
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Point on the segment from `self` to `other` at parameter `t`.
    pub fn lerp(&self, other: &TernaryPoint, t: f64) -> TernaryPoint {
        let mut coords = [0.0; 3];
        for (i, out) in coords.iter_mut().enumerate() {
            *out = self.coords[i] + t * (other.coords[i] - self.coords[i]);
        }
        TernaryPoint { coords }
    }
}

impl fmt::Display for TernaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.coords[0], self.coords[1], self.coords[2])
    }
}

/// Proportional normalization of a nonnegative triple; all-zero maps to the center.
pub fn to_ternary(raw: [f64; 3]) -> Result<TernaryPoint> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(CoosError::domain("non-finite component in raw triple"));
    }
    if raw.iter().any(|&v| v < 0.0) {
        return Err(CoosError::domain(format!(
            "negative component in raw triple {raw:?}"
        )));
    }
    let sum: f64 = raw.iter().sum();
    if sum == 0.0 {
        return Ok(TernaryPoint::CENTER);
    }
    Ok(TernaryPoint {
        coords: [raw[0] / sum, raw[1] / sum, raw[2] / sum],
    })
}

/// Weighted arithmetic mean of simplex points.
pub fn centroid(points: &[TernaryPoint], weights: Option<&[f64]>) -> Result<TernaryPoint> {
    if points.is_empty() {
        return Err(CoosError::domain("centroid of an empty point list"));
    }
    let mut acc = [0.0; 3];
    let total = match weights {
        None => {
            for p in points {
                for (a, v) in acc.iter_mut().zip(p.coords) {
                    *a += v;
                }
            }
            points.len() as f64
        }
        Some(ws) => {
            if ws.len() != points.len() {
                return Err(CoosError::domain(format!(
                    "{} weights for {} points",
                    ws.len(),
                    points.len()
                )));
            }
            if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(CoosError::domain("centroid weights must be finite and nonnegative"));
            }
            let total: f64 = ws.iter().sum();
            if total <= 0.0 {
                return Err(CoosError::domain("centroid weights sum to zero"));
            }
            for (p, w) in points.iter().zip(ws) {
                for (a, v) in acc.iter_mut().zip(p.coords) {
                    *a += w * v;
                }
            }
            total
        }
    };
    Ok(TernaryPoint {
        coords: [acc[0] / total, acc[1] / total, acc[2] / total],
    })
}

/// Meeting point of the line through `p` holding `axis_p` and the line through
/// `q` holding `axis_q`. `None` when that point falls outside the simplex.
pub fn constant_coordinate_intersection(
    p: &TernaryPoint,
    axis_p: Axis,
    q: &TernaryPoint,
    axis_q: Axis,
) -> Result<Option<TernaryPoint>> {
    if axis_p == axis_q {
        return Err(CoosError::domain(format!(
            "held axes must differ (both {axis_p})"
        )));
    }
    let mut coords = [0.0; 3];
    coords[axis_p.index()] = p.get(axis_p);
    coords[axis_q.index()] = q.get(axis_q);
    let rest = 3 - axis_p.index() - axis_q.index();
    coords[rest] = 1.0 - p.get(axis_p) - q.get(axis_q);
    if coords.iter().any(|&v| v < -CONSTRUCT_TOL) {
        return Ok(None);
    }
    Ok(Some(TernaryPoint { coords }))
}

/// Straight segment in the simplex, optionally along a constant-coordinate line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: TernaryPoint,
    pub end: TernaryPoint,
    pub held_coordinate: Option<Axis>,
}

impl Segment {
    pub fn new(start: TernaryPoint, end: TernaryPoint, held: Option<Axis>) -> Result<Self> {
        if let Some(axis) = held {
            let residual = (start.get(axis) - end.get(axis)).abs();
            if residual > SIMPLEX_TOL {
                return Err(CoosError::domain(format!(
                    "segment endpoints differ on held axis {axis} by {residual}"
                )));
            }
        }
        Ok(Segment {
            start,
            end,
            held_coordinate: held,
        })
    }

    pub fn length(&self) -> f64 {
        self.start.distance(&self.end)
    }

    /// Difference of the held coordinate between endpoints (0 when unheld).
    pub fn held_residual(&self) -> f64 {
        self.held_coordinate
            .map(|axis| (self.start.get(axis) - self.end.get(axis)).abs())
            .unwrap_or(0.0)
    }
}
