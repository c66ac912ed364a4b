use std::collections::BTreeMap;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use super::mask::SegmentationMask;
use crate::error::{Error, Result};

/// One-to-one matching of predicted labels to ground-truth labels. Label 0
/// (background) never takes part.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    /// `pred label -> gt label`, only for matched labels.
    pub pairs: BTreeMap<u32, u32>,
    /// Sum of the intersection counts of the matched pairs.
    pub weight: u64,
}

impl Matching {
    pub fn gt_of(&self, pred: u32) -> Option<u32> {
        self.pairs.get(&pred).copied()
    }

    /// Identity on the labels `1..=k`.
    pub fn identity(k: u32) -> Self {
        Self {
            pairs: (1..=k).map(|l| (l, l)).collect(),
            weight: 0,
        }
    }
}

/// Pixel counts of every `(pred, gt)` label pair with both nonzero.
pub fn intersections(pred: &[u32], gt: &[u32]) -> BTreeMap<(u32, u32), u64> {
    let mut m = BTreeMap::new();
    for (&p, &g) in pred.iter().zip(gt) {
        if p != 0 && g != 0 {
            *m.entry((p, g)).or_insert(0) += 1;
        }
    }
    m
}

/// Maximum-weight one-to-one matching on intersection counts over two
/// equally long label vectors. Pairs that do not intersect are never
/// matched.
pub fn match_labels(pred: &[u32], gt: &[u32]) -> Result<Matching> {
    if pred.len() != gt.len() {
        return Err(Error::Shape(format!(
            "{} predicted vs {} ground-truth labels",
            pred.len(),
            gt.len()
        )));
    }
    let inter = intersections(pred, gt);
    let index = |it: &mut dyn Iterator<Item = u32>| -> Vec<u32> {
        let mut v: Vec<u32> = it.collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let rows = index(&mut inter.keys().map(|k| k.0));
    let cols = index(&mut inter.keys().map(|k| k.1));
    if rows.is_empty() {
        return Ok(Matching::default());
    }
    let n = rows.len().max(cols.len());
    let weights = Matrix::from_fn(n, n, |(r, c)| match (rows.get(r), cols.get(c)) {
        (Some(p), Some(g)) => inter.get(&(*p, *g)).copied().unwrap_or(0) as i64,
        _ => 0,
    });
    let (_, assign) = kuhn_munkres(&weights);
    let mut out = Matching::default();
    for (r, &c) in assign.iter().enumerate() {
        if let (Some(&p), Some(&g)) = (rows.get(r), cols.get(c)) {
            if let Some(&w) = inter.get(&(p, g)) {
                out.pairs.insert(p, g);
                out.weight += w;
            }
        }
    }
    Ok(out)
}

pub fn match_objects(pred: &SegmentationMask, gt: &SegmentationMask) -> Result<Matching> {
    if (pred.width, pred.height) != (gt.width, gt.height) {
        return Err(Error::Shape(format!(
            "mask sizes differ: {}x{} vs {}x{}",
            pred.width, pred.height, gt.width, gt.height
        )));
    }
    match_labels(&pred.labels, &gt.labels)
}
