use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::matching::Matching;
use crate::support::SceneHierarchyGraph;

/// Support edges of a prediction compared with ground truth after mapping
/// predicted objects through the segmentation matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportAgreement {
    /// Every predicted object is matched and the mapped edge set, root edges
    /// included, equals the ground truth's.
    pub exact: bool,
    /// Object-to-object ground-truth edges found in the prediction.
    pub hits: usize,
    /// Object-to-object ground-truth edges.
    pub gt_edges: usize,
    /// Object-to-object predicted edges with both ends matched.
    pub pred_edges: usize,
}

/// `(supporter, supportee)` pairs with the root written as `None`.
type Edge = (Option<usize>, usize);

fn edge_set(graph: &SceneHierarchyGraph, map: impl Fn(usize) -> Option<usize>) -> (BTreeSet<Edge>, bool) {
    let mut set = BTreeSet::new();
    let mut complete = true;
    for e in &graph.edges {
        let from = if e.from == graph.root {
            Some(None)
        } else {
            map(e.from).map(Some)
        };
        match (from, map(e.to)) {
            (Some(f), Some(t)) => {
                set.insert((f, t));
            }
            _ => complete = false,
        }
    }
    (set, complete)
}

pub fn support_agreement(
    pred: &SceneHierarchyGraph,
    gt: &SceneHierarchyGraph,
    matching: &Matching,
) -> SupportAgreement {
    let (p, complete) = edge_set(pred, |o| matching.gt_of(o as u32 + 1).map(|g| g as usize - 1));
    let (g, _) = edge_set(gt, Some);
    let all_matched = (0..pred.objects.len()).all(|o| matching.gt_of(o as u32 + 1).is_some());
    let inner = |s: &BTreeSet<Edge>| s.iter().filter(|e| e.0.is_some()).copied().collect::<BTreeSet<_>>();
    let (pi, gi) = (inner(&p), inner(&g));
    SupportAgreement {
        exact: all_matched && complete && p == g,
        hits: pi.intersection(&gi).count(),
        gt_edges: gi.len(),
        pred_edges: pi.len(),
    }
}
