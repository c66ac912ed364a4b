use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::distance::distance_lower_bound;
use crate::geometry::{primitive_distance, PlanePrimitive};

/// Primitive ids and the pairs (smaller id first) within `theta_adj`, with
/// their distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyGraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn build_adjacency(prims: &[PlanePrimitive], theta_adj: f64) -> AdjacencyGraph {
    let n = prims.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut edges: Vec<(usize, usize, f64)> = pairs
        .par_iter()
        .filter_map(|&(a, b)| {
            let (pa, pb) = (&prims[a], &prims[b]);
            if distance_lower_bound(pa, pb) > theta_adj {
                return None;
            }
            let d = primitive_distance(pa, pb);
            (d <= theta_adj).then(|| (pa.id.min(pb.id), pa.id.max(pb.id), d))
        })
        .collect();
    edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    AdjacencyGraph {
        vertices: prims.iter().map(|p| p.id).collect(),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GravityPrior;
    use nalgebra::Point3;

    fn square(id: usize, x0: f64) -> PlanePrimitive {
        let pts = [
            Point3::new(x0, 0.0, 0.0),
            Point3::new(x0 + 1.0, 0.0, 0.0),
            Point3::new(x0 + 1.0, 1.0, 0.0),
            Point3::new(x0, 1.0, 0.0),
        ];
        PlanePrimitive::from_polygon(id, &pts, &GravityPrior::z_up(), 10.0).unwrap()
    }

    #[test]
    fn threshold_controls_edge() {
        let prims = [square(0, 0.0), square(1, 1.05)];
        assert!(build_adjacency(&prims, 0.02).edges.is_empty());
        let g = build_adjacency(&prims, 0.06);
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].0, g.edges[0].1), (0, 1));
        assert!((g.edges[0].2 - 0.05).abs() < 1e-12);
    }
}
