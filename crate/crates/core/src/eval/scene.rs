use serde::{Deserialize, Serialize};

use super::graph::{apply_significance_rules, GraphMatrix};
use super::mask::SegmentationMask;
use super::matching::{match_labels, Matching};
use super::prf::{prf_boundary, prf_overlap_labels, Prf};
use super::spectral::{cheeger_section, spectral_section};
use super::support::{support_agreement, SupportAgreement};
use crate::error::Result;
use crate::support::SceneHierarchyGraph;

/// Every score of one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScore {
    pub overlap: Prf,
    /// Present when label images were supplied.
    pub boundary: Option<Prf>,
    pub cheeger_section: f64,
    pub spectral_section: f64,
    pub support: SupportAgreement,
    pub matched: usize,
    pub pred_objects: usize,
    pub gt_objects: usize,
}

/// What is scored: per-element labels (object id + 1, 0 = none) over the
/// same points or pixels, and the two hierarchies.
pub struct SceneInput<'a> {
    pub pred_labels: &'a [u32],
    pub gt_labels: &'a [u32],
    pub pred_graph: &'a SceneHierarchyGraph,
    pub gt_graph: &'a SceneHierarchyGraph,
    /// Label images for boundary scores, `(pred, gt)`.
    pub masks: Option<(&'a SegmentationMask, &'a SegmentationMask)>,
    pub dilation_px: u32,
}

pub fn score_scene(input: &SceneInput) -> Result<SceneScore> {
    let matching: Matching = match_labels(input.pred_labels, input.gt_labels)?;
    let overlap = prf_overlap_labels(input.pred_labels, input.gt_labels, &matching);
    let boundary = match input.masks {
        Some((p, g)) => {
            let m = super::matching::match_objects(p, g)?;
            Some(prf_boundary(p, g, &m, input.dilation_px))
        }
        None => None,
    };
    let k = input.gt_graph.objects.len();
    let gs = apply_significance_rules(input.pred_graph, &matching, k);
    let gt = GraphMatrix::from_hierarchy(input.gt_graph);
    Ok(SceneScore {
        overlap,
        boundary,
        cheeger_section: cheeger_section(&gs, &gt)?,
        spectral_section: spectral_section(&gs, &gt)?,
        support: support_agreement(input.pred_graph, input.gt_graph, &matching),
        matched: matching.pairs.len(),
        pred_objects: input.pred_graph.objects.len(),
        gt_objects: k,
    })
}
