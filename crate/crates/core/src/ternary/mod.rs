//! Geometry on the 2-simplex.
//!
//! Coordinates are the social (`A`), environmental (`B`) and economic (`C`)
//! value shares. Euclidean quantities (lengths, areas, nearest neighbours) are
//! measured in a fixed equilateral embedding with unit circumradius:
//! `A -> (0, 1)`, `B -> (-sqrt(3)/2, -1/2)`, `C -> (sqrt(3)/2, -1/2)`.

mod point;
mod region;
pub mod svg;

pub use point::{
    centroid, constant_coordinate_intersection, to_ternary, Axis, Segment, TernaryPoint,
    CONSTRUCT_TOL, SIMPLEX_TOL,
};
pub use region::{BoundKind, CoordinateBound, SimplexRegion};

/// Vertex positions of the embedding, indexed by axis.
pub const EMBED_VERTICES: [(f64, f64); 3] = [
    (0.0, 1.0),
    (-0.866_025_403_784_438_6, -0.5),
    (0.866_025_403_784_438_6, -0.5),
];

/// 2D embedding of a barycentric triple.
pub fn embed(coords: [f64; 3]) -> (f64, f64) {
    let mut x = 0.0;
    let mut y = 0.0;
    for (w, (vx, vy)) in coords.iter().zip(EMBED_VERTICES) {
        x += w * vx;
        y += w * vy;
    }
    (x, y)
}

/// Inverse of [`embed`]; the result sums to one but may leave the simplex.
pub fn unembed(x: f64, y: f64) -> [f64; 3] {
    // y = a - (1 - a)/2  =>  a = (2y + 1)/3
    let a = (2.0 * y + 1.0) / 3.0;
    let rest = 1.0 - a;
    // x = (c - b) * sqrt(3)/2
    let diff = x / EMBED_VERTICES[2].0;
    let c = (rest + diff) / 2.0;
    let b = rest - c;
    [a, b, c]
}
