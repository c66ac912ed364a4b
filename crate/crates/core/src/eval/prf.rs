use serde::{Deserialize, Serialize};

use super::mask::SegmentationMask;
use super::matching::Matching;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub p: f64,
    pub r: f64,
    pub f: f64,
}

impl Prf {
    pub fn from_counts(tp_p: u64, pred_total: u64, tp_r: u64, gt_total: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (p, r) = (ratio(tp_p, pred_total), ratio(tp_r, gt_total));
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        Self { p, r, f }
    }
}

/// Overlap P/R/F over two equally long label vectors.
pub fn prf_overlap_labels(pred: &[u32], gt: &[u32], matching: &Matching) -> Prf {
    let mut tp = 0u64;
    let mut pred_total = 0u64;
    let mut gt_total = 0u64;
    for (&p, &g) in pred.iter().zip(gt) {
        pred_total += (p != 0) as u64;
        gt_total += (g != 0) as u64;
        if p != 0 && g != 0 && matching.gt_of(p) == Some(g) {
            tp += 1;
        }
    }
    Prf::from_counts(tp, pred_total, tp, gt_total)
}

pub fn prf_overlap(pred: &SegmentationMask, gt: &SegmentationMask, matching: &Matching) -> Prf {
    prf_overlap_labels(&pred.labels, &gt.labels, matching)
}

/// Object pixels with a 4-neighbor carrying a different label.
pub fn boundary_pixels(mask: &SegmentationMask) -> Vec<bool> {
    let (w, h) = (mask.width as i64, mask.height as i64);
    let mut out = vec![false; mask.labels.len()];
    for r in 0..h {
        for c in 0..w {
            let l = mask.labels[(r * w + c) as usize];
            if l == 0 {
                continue;
            }
            out[(r * w + c) as usize] = [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|(dr, dc)| {
                let (rr, cc) = (r + dr, c + dc);
                rr >= 0 && rr < h && cc >= 0 && cc < w && mask.labels[(rr * w + cc) as usize] != l
            });
        }
    }
    out
}

/// Boundary pixels of `a` that lie within `d` pixels (Chebyshev) of a
/// boundary pixel of `b` whose label is the counterpart `partner(label)`.
fn near_counterpart(
    a: &SegmentationMask,
    ba: &[bool],
    b: &SegmentationMask,
    bb: &[bool],
    d: u32,
    partner: impl Fn(u32) -> Option<u32>,
) -> u64 {
    let (w, h, d) = (a.width as i64, a.height as i64, d as i64);
    let mut tp = 0;
    for r in 0..h {
        for c in 0..w {
            let i = (r * w + c) as usize;
            if !ba[i] {
                continue;
            }
            let Some(target) = partner(a.labels[i]) else {
                continue;
            };
            let hit = (r - d).max(0)..=(r + d).min(h - 1);
            if hit.clone().any(|rr| {
                ((c - d).max(0)..=(c + d).min(w - 1)).any(|cc| {
                    let j = (rr * w + cc) as usize;
                    bb[j] && b.labels[j] == target
                })
            }) {
                tp += 1;
            }
        }
    }
    tp
}

/// Boundary P/R/F: precision counts predicted boundary pixels near the
/// boundary of their matched ground-truth object, recall counts
/// ground-truth boundary pixels near the boundary of their matched
/// prediction.
pub fn prf_boundary(pred: &SegmentationMask, gt: &SegmentationMask, matching: &Matching, dilation_px: u32) -> Prf {
    let bp = boundary_pixels(pred);
    let bg = boundary_pixels(gt);
    let inverse: std::collections::BTreeMap<u32, u32> = matching.pairs.iter().map(|(&p, &g)| (g, p)).collect();
    let tp_p = near_counterpart(pred, &bp, gt, &bg, dilation_px, |l| matching.gt_of(l));
    let tp_r = near_counterpart(gt, &bg, pred, &bp, dilation_px, |l| inverse.get(&l).copied());
    let count = |b: &[bool]| b.iter().filter(|&&x| x).count() as u64;
    Prf::from_counts(tp_p, count(&bp), tp_r, count(&bg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::matching::match_objects;

    fn square_mask(w: u32, offset: u32) -> SegmentationMask {
        let mut m = SegmentationMask::new(w, w);
        for r in 5..15 {
            for c in (5 + offset)..(15 + offset) {
                m.set(r, c, 1);
            }
        }
        m
    }

    #[test]
    fn perfect_segmentation() {
        let m = square_mask(20, 0);
        let mt = match_objects(&m, &m).unwrap();
        assert_eq!(prf_overlap(&m, &m, &mt), Prf { p: 1.0, r: 1.0, f: 1.0 });
        assert_eq!(prf_boundary(&m, &m, &mt, 2), Prf { p: 1.0, r: 1.0, f: 1.0 });
    }

    #[test]
    fn half_coverage() {
        let gt = SegmentationMask::from_labels(4, 1, vec![1, 1, 1, 1]).unwrap();
        let pred = SegmentationMask::from_labels(4, 1, vec![1, 1, 0, 0]).unwrap();
        let mt = match_objects(&pred, &gt).unwrap();
        let prf = prf_overlap(&pred, &gt, &mt);
        assert_eq!((prf.p, prf.r), (1.0, 0.5));
        assert!((prf.f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unmatched_prediction_only_lowers_precision() {
        let gt = vec![1, 1, 1, 1, 0, 0];
        let pred = vec![1, 1, 1, 1, 2, 2];
        let m = crate::eval::matching::match_labels(&pred, &gt).unwrap();
        let prf = prf_overlap_labels(&pred, &gt, &m);
        assert_eq!((prf.p, prf.r), (4.0 / 6.0, 1.0));
    }

    #[test]
    fn one_pixel_shift_within_tolerance() {
        let gt = square_mask(20, 0);
        let pred = square_mask(20, 1);
        let mt = match_objects(&pred, &gt).unwrap();
        assert_eq!(prf_boundary(&pred, &gt, &mt, 2), Prf { p: 1.0, r: 1.0, f: 1.0 });
    }

    #[test]
    fn shift_beyond_tolerance_gives_zero_precision() {
        let mut gt = SegmentationMask::new(30, 30);
        let mut pred = SegmentationMask::new(30, 30);
        // a wide stripe: only its left and right borders are boundary
        for r in 0..30 {
            for c in 5..20 {
                gt.set(r, c, 1);
                pred.set(r, c + 3, 1);
            }
        }
        let mt = match_objects(&pred, &gt).unwrap();
        assert_eq!(prf_boundary(&pred, &gt, &mt, 2).p, 0.0);
    }

    #[test]
    fn harmonic_mean_identity() {
        let prf = Prf::from_counts(3, 7, 3, 5);
        assert!(prf.f <= prf.p.max(prf.r));
        assert!((prf.f - 2.0 / (1.0 / prf.p + 1.0 / prf.r)).abs() < 1e-15);
    }
}
