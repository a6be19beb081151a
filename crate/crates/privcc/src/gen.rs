//! Random graph generators. Pure functions of (parameters, stream).

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::stream::RngStream;

/// Erdős–Rényi G(n, p): each unordered pair becomes an edge independently
/// with probability `p`.
pub fn gen_gnp(n: usize, p: f64, rng: &mut RngStream) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Random geometric graph: `n` points uniform in the unit square, an edge
/// whenever two points are at Euclidean distance at most `r`.
pub fn gen_geometric(n: usize, r: f64, rng: &mut RngStream) -> Result<Graph> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Parameter(format!("r = {r} outside (0, 1)")));
    }
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    geometric_from_points(&points, r)
}

/// Geometric graph on explicit points (used by tests to pin configurations).
pub fn geometric_from_points(points: &[(f64, f64)], r: f64) -> Result<Graph> {
    let n = points.len();
    let r2 = r * r;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let dx = points[u].0 - points[v].0;
            let dy = points[u].1 - points[v].1;
            if dx * dx + dy * dy <= r2 {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnp_extremes() {
        let mut rng = RngStream::from_seed(3);
        let empty = gen_gnp(6, 0.0, &mut rng).unwrap();
        assert_eq!(empty.m(), 0);
        let full = gen_gnp(6, 1.0, &mut rng).unwrap();
        assert_eq!(full.m(), 15);
        assert!(gen_gnp(4, 1.5, &mut rng).is_err());
    }

    #[test]
    fn gnp_mean_degree_matches_binomial() {
        // E[deg] = (n-1)p; averaging over 20 seeds must land within 3 sigma.
        let n = 1000;
        let p = 2.0 / n as f64;
        let seeds = 20;
        let mut total_edges = 0usize;
        for s in 0..seeds {
            let mut rng = RngStream::from_seed(100 + s);
            total_edges += gen_gnp(n, p, &mut rng).unwrap().m();
        }
        let pairs = (n * (n - 1) / 2) as f64;
        let mean_m = total_edges as f64 / seeds as f64;
        let sigma_mean = (pairs * p * (1.0 - p) / seeds as f64).sqrt();
        assert!(
            (mean_m - pairs * p).abs() <= 3.0 * sigma_mean,
            "mean edge count {mean_m} vs expected {} (sigma {sigma_mean})",
            pairs * p
        );
    }

    #[test]
    fn geometric_pinned_points() {
        let g = geometric_from_points(&[(0.0, 0.0), (0.0, 1.0)], 0.5).unwrap();
        assert_eq!(g.m(), 0);
        let h = geometric_from_points(&[(0.0, 0.0), (0.0, 0.3)], 0.5).unwrap();
        assert_eq!(h.m(), 1);
    }

    #[test]
    fn geometric_tiny_radius_disconnects() {
        let mut rng = RngStream::from_seed(9);
        let g = gen_geometric(40, 1e-9, &mut rng).unwrap();
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_geometric(50, 0.2, &mut RngStream::from_seed(4)).unwrap();
        let b = gen_geometric(50, 0.2, &mut RngStream::from_seed(4)).unwrap();
        assert_eq!(a, b);
    }
}
