use serde::{Deserialize, Serialize};

use super::matching::Matching;
use crate::support::SceneHierarchyGraph;

/// Symmetric 0/1 adjacency of an undirected graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMatrix {
    pub n: usize,
    pub adj: Vec<Vec<u8>>,
}

impl GraphMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![vec![0; n]; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.connect(a, b);
        }
        g
    }

    /// Adds the undirected edge `a - b`; self-loops are ignored.
    pub fn connect(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a][b] = 1;
            self.adj[b][a] = 1;
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().map(|&x| x as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in 0..self.n {
                if self.adj[v][u] == 1 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Ground-truth graph: every object matched to itself.
    pub fn from_hierarchy(graph: &SceneHierarchyGraph) -> Self {
        apply_significance_rules(
            graph,
            &Matching::identity(graph.objects.len() as u32),
            graph.objects.len(),
        )
    }
}

/// Symmetrized object graph on the ground-truth node set: node `g` is
/// ground-truth object `g`, node `gt_objects` is the root. Predicted object
/// `o` (mask label `o + 1`) maps to the node of its matched ground-truth
/// label; edges touching unmatched objects are dropped (rule 1). Nodes left
/// without any edge are attached to the root (rule 2); a root left without
/// edges is attached to every node lacking a mapped supporter.
pub fn apply_significance_rules(graph: &SceneHierarchyGraph, matching: &Matching, gt_objects: usize) -> GraphMatrix {
    let root = gt_objects;
    let node = |v: usize| -> Option<usize> {
        if v == graph.root {
            Some(root)
        } else {
            matching
                .gt_of(v as u32 + 1)
                .map(|g| g as usize - 1)
                .filter(|&g| g < gt_objects)
        }
    };
    let mut g = GraphMatrix::new(gt_objects + 1);
    let mut supported = vec![false; gt_objects + 1];
    for e in &graph.edges {
        if let (Some(a), Some(b)) = (node(e.from), node(e.to)) {
            g.connect(a, b);
            supported[b] = true;
        }
    }
    for v in 0..gt_objects {
        if g.degree(v) == 0 {
            g.connect(root, v);
            supported[v] = true;
        }
    }
    if g.degree(root) == 0 {
        for v in (0..gt_objects).filter(|&v| !supported[v]) {
            g.connect(root, v);
        }
    }
    if g.degree(root) == 0 && gt_objects > 0 {
        g.connect(root, 0);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bbox;
    use crate::support::{Phase, SceneObject, SuppEdge};
    use nalgebra::{Point3, Vector3};

    fn chain(k: usize) -> SceneHierarchyGraph {
        let bbox = Bbox {
            center: Point3::origin(),
            half_extents: Vector3::repeat(0.1),
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
        };
        let objects = (0..k)
            .map(|id| SceneObject {
                id,
                primitive_ids: vec![id],
                bbox: bbox.clone(),
                contains_ground: id == 0,
            })
            .collect();
        let mut edges = vec![SuppEdge {
            from: k,
            to: 0,
            phase: Phase::Root,
        }];
        for v in 1..k {
            edges.push(SuppEdge {
                from: v - 1,
                to: v,
                phase: Phase::Local,
            });
        }
        SceneHierarchyGraph {
            objects,
            root: k,
            edges,
            primitive_level: Vec::new(),
        }
    }

    #[test]
    fn all_matched_is_symmetrization() {
        let g = GraphMatrix::from_hierarchy(&chain(4));
        let want = GraphMatrix::from_edges(5, &[(4, 0), (0, 1), (1, 2), (2, 3)]);
        assert_eq!(g, want);
    }

    #[test]
    fn unmatched_mid_chain_object_rewires_neighbors() {
        // object 2 of root -> 0 -> 1 -> 2 -> 3 -> 4 is mis-segmented
        let h = chain(5);
        let mut m = Matching::identity(5);
        m.pairs.remove(&3);
        let g = apply_significance_rules(&h, &m, 5);
        // 1 keeps its edge to 0; 3 keeps its edge to 4; 2 is isolated -> root
        let want = GraphMatrix::from_edges(6, &[(5, 0), (0, 1), (3, 4), (5, 2)]);
        assert_eq!(g, want);
    }

    #[test]
    fn renamed_prediction_maps_back() {
        // prediction numbers the objects in reverse
        let h = chain(3);
        let m = Matching {
            pairs: [(1, 3), (2, 2), (3, 1)].into_iter().collect(),
            weight: 0,
        };
        let g = apply_significance_rules(&h, &m, 3);
        assert_eq!(g, GraphMatrix::from_edges(4, &[(3, 2), (2, 1), (1, 0)]));
    }
}
