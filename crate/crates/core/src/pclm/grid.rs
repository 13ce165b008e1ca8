use std::sync::{Arc, OnceLock};

/// Triangular lattice of weight triples `(i, j, k) / divisions` with
/// `i + j + k = divisions`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexGrid {
    divisions: u32,
    nodes: Vec<[f64; 3]>,
}

impl SimplexGrid {
    pub fn new(divisions: u32) -> Self {
        assert!(divisions > 0, "grid needs at least one division");
        let n = divisions as f64;
        let mut nodes = Vec::with_capacity(((divisions + 1) * (divisions + 2) / 2) as usize);
        for i in 0..=divisions {
            for j in 0..=(divisions - i) {
                let k = divisions - i - j;
                nodes.push([i as f64 / n, j as f64 / n, k as f64 / n]);
            }
        }
        SimplexGrid { divisions, nodes }
    }

    /// Shared grid with step 0.005 (20,301 nodes).
    pub fn standard() -> Arc<SimplexGrid> {
        static GRID: OnceLock<Arc<SimplexGrid>> = OnceLock::new();
        GRID.get_or_init(|| Arc::new(SimplexGrid::new(200))).clone()
    }

    pub fn divisions(&self) -> u32 {
        self.divisions
    }

    pub fn step(&self) -> f64 {
        1.0 / self.divisions as f64
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_size() {
        let g = SimplexGrid::standard();
        assert_eq!(g.len(), 201 * 202 / 2);
        assert_eq!(g.step(), 0.005);
        for w in g.nodes() {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
