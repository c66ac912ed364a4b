//! Objects, support relations and the rooted scene hierarchy graph.

pub mod export;
pub mod hierarchy;
pub mod objects;
pub mod relations;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Bbox;
use crate::patterns::PatternEdge;

pub use hierarchy::infer_hierarchy;
pub use objects::{assemble_objects, find_ground};
pub use relations::{global_support, local_support, GlobalEvidence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupportConfig {
    /// Largest vertical gap between a supporting plane and a bbox bottom (m).
    pub eps_gap: f64,
    /// Minimum fraction of the bbox bottom covered by the supporting plane.
    pub rho_min: f64,
    /// Minimum hull area for the ground plane (m^2).
    pub ground_min_area: f64,
    /// Explicit ground primitive, overriding the lowest-plane rule.
    pub ground_id: Option<usize>,
    /// Smallest bbox half extent (m).
    pub min_half_extent: f64,
}

impl Default for SupportConfig {
    fn default() -> Self {
        Self {
            eps_gap: 0.04,
            rho_min: 0.3,
            ground_min_area: 0.1,
            ground_id: None,
            min_half_extent: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: usize,
    pub primitive_ids: Vec<usize>,
    pub bbox: Bbox,
    pub contains_ground: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Local,
    Global,
    Root,
}

/// `from` supports `to`. Node ids are object ids; the root's id is the
/// number of objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SuppEdge {
    pub from: usize,
    pub to: usize,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneHierarchyGraph {
    pub objects: Vec<SceneObject>,
    pub root: usize,
    pub edges: Vec<SuppEdge>,
    /// Pattern edges whose endpoints belong to the same object.
    #[serde(default)]
    pub primitive_level: Vec<PatternEdge>,
}

impl SceneHierarchyGraph {
    pub fn node_count(&self) -> usize {
        self.objects.len() + 1
    }

    pub fn supporters(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.to == node).map(|e| e.from)
    }

    /// Checks the structural invariants: ids match positions, no self or
    /// duplicate edges, root has no supporter, every object has one and is
    /// reachable from the root, and the ground object hangs from the root
    /// only.
    pub fn validate(&self) -> Result<()> {
        let k = self.objects.len();
        let bad = |m: String| Err(Error::MalformedGraph(m));
        if self.root != k {
            return bad(format!("root id {} but {k} objects", self.root));
        }
        if let Some((i, o)) = self.objects.iter().enumerate().find(|(i, o)| o.id != *i) {
            return bad(format!("object at position {i} has id {}", o.id));
        }
        if self.objects.iter().filter(|o| o.contains_ground).count() > 1 {
            return bad("more than one ground object".into());
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.edges {
            if e.from > k || e.to > k {
                return bad(format!("edge {}->{} out of range", e.from, e.to));
            }
            if e.from == e.to {
                return bad(format!("self edge on {}", e.from));
            }
            if e.to == k {
                return bad("root has a supporter".into());
            }
            if !seen.insert((e.from, e.to)) {
                return bad(format!("duplicate edge {}->{}", e.from, e.to));
            }
        }
        for o in &self.objects {
            let sup: Vec<usize> = self.supporters(o.id).collect();
            if sup.is_empty() {
                return bad(format!("object {} has no supporter", o.id));
            }
            if o.contains_ground && sup != [k] {
                return bad(format!("ground object {} supported by {sup:?}", o.id));
            }
        }
        let mut reached = vec![false; k + 1];
        reached[k] = true;
        let mut queue = VecDeque::from([k]);
        while let Some(u) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.from == u) {
                if !reached[e.to] {
                    reached[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        if let Some(u) = reached.iter().position(|r| !r) {
            return bad(format!("object {u} unreachable from root"));
        }
        Ok(())
    }

    /// Rows are supported nodes, columns supporting nodes; index 0 is the
    /// root and object `k` sits at index `k + 1`.
    pub fn affinity_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.node_count();
        let idx = |node: usize| if node == self.root { 0 } else { node + 1 };
        let mut m = vec![vec![0u8; n]; n];
        for e in &self.edges {
            m[idx(e.to)][idx(e.from)] = 1;
        }
        m
    }

    /// Supporter -> supportee pairs encoded by an affinity matrix, in the
    /// node ids of a graph with `matrix.len() - 1` objects.
    pub fn edges_from_affinity(matrix: &[Vec<u8>]) -> Result<Vec<(usize, usize)>> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("affinity matrix must be square and nonempty".into()));
        }
        let root = n - 1;
        let node = |i: usize| if i == 0 { root } else { i - 1 };
        let mut out = Vec::new();
        for (r, row) in matrix.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    out.push((node(c), node(r)));
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::{Point3, Vector3};
    use proptest::prelude::*;

    use super::*;

    fn bbox() -> Bbox {
        Bbox {
            center: Point3::origin(),
            half_extents: Vector3::repeat(0.1),
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
        }
    }

    fn graph(k: usize, edges: &[(usize, usize, Phase)]) -> SceneHierarchyGraph {
        SceneHierarchyGraph {
            objects: (0..k)
                .map(|id| SceneObject {
                    id,
                    primitive_ids: vec![id],
                    bbox: bbox(),
                    contains_ground: id == 0,
                })
                .collect(),
            root: k,
            edges: edges
                .iter()
                .map(|&(from, to, phase)| SuppEdge { from, to, phase })
                .collect(),
            primitive_level: Vec::new(),
        }
    }

    #[test]
    fn affinity_of_a_chain() {
        let g = graph(2, &[(2, 0, Phase::Root), (0, 1, Phase::Local)]);
        g.validate().unwrap();
        // node order: root, C0, C1
        assert_eq!(g.affinity_matrix(), vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn multi_supporter_rows() {
        let g = graph(
            4,
            &[
                (4, 0, Phase::Root),
                (0, 1, Phase::Local),
                (0, 2, Phase::Local),
                (1, 3, Phase::Local),
                (2, 3, Phase::Global),
            ],
        );
        g.validate().unwrap();
        assert_eq!(g.affinity_matrix()[4], vec![0, 0, 1, 1, 0]);
        let csv = export::affinity_csv(&g);
        assert!(csv.starts_with("supported\\supporting,root,C0,C1,C2,C3\n"));
        assert!(csv.contains("\nC3,0,0,1,1,0\n"));
        assert_eq!(export::parse_affinity_csv(&csv).unwrap(), g.affinity_matrix());
    }

    #[test]
    fn invalid_graphs_are_rejected() {
        let cases: [&[(usize, usize, Phase)]; 5] = [
            &[(2, 0, Phase::Root)],
            &[(2, 0, Phase::Root), (1, 1, Phase::Local)],
            &[(2, 0, Phase::Root), (0, 1, Phase::Local), (1, 2, Phase::Local)],
            &[(2, 0, Phase::Root), (1, 0, Phase::Local), (2, 1, Phase::Root)],
            &[(2, 0, Phase::Root), (0, 1, Phase::Local), (0, 1, Phase::Global)],
        ];
        for edges in cases {
            assert!(graph(2, edges).validate().is_err(), "{edges:?}");
        }
        // detached cycle: 1 and 2 support each other, nothing links them to the root
        let g = graph(3, &[(3, 0, Phase::Root), (1, 2, Phase::Local), (2, 1, Phase::Local)]);
        assert!(g.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = graph(2, &[(2, 0, Phase::Root), (0, 1, Phase::Global)]);
        let text = export::to_json(&g).unwrap();
        assert!(text.contains("\"phase\": \"global\""));
        assert_eq!(export::from_json(&text).unwrap(), g);
    }

    proptest! {
        #[test]
        fn affinity_round_trip(k in 1usize..8, picks in proptest::collection::vec(any::<u16>(), 0..12)) {
            // random forest hanging from the root: each object gets supporters
            // among the lower ids, or the root
            let mut edges = vec![(k, 0, Phase::Root)];
            for j in 1..k {
                let mut sup: Vec<usize> = picks
                    .iter()
                    .filter(|&&p| p as usize % k == j)
                    .map(|&p| (p as usize / k) % j)
                    .collect();
                sup.sort_unstable();
                sup.dedup();
                if sup.is_empty() {
                    edges.push((k, j, Phase::Root));
                }
                edges.extend(sup.into_iter().map(|i| (i, j, Phase::Local)));
            }
            let g = graph(k, &edges);
            g.validate().unwrap();
            let m = g.affinity_matrix();
            let mut want: Vec<(usize, usize)> = edges.iter().map(|&(a, b, _)| (a, b)).collect();
            want.sort_unstable();
            prop_assert_eq!(SceneHierarchyGraph::edges_from_affinity(&m).unwrap(), want.clone());
            let back = graph(k, &want.iter().map(|&(a, b)| (a, b, Phase::Local)).collect::<Vec<_>>());
            prop_assert_eq!(back.affinity_matrix(), m);
        }
    }
}
