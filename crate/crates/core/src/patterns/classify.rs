use nalgebra::{Point2, Point3, Vector3};

use super::ratio::{compute_ratio, strip_ratio};
use super::{Pattern, PatternConfig, PatternEdge};
use crate::geometry::hull::{boundary_depth, intersection_area, line_interval};
use crate::geometry::{primitive_distance, GravityPrior, PlanePrimitive, Segment3};

/// Classifies an adjacent pair into one of the eight patterns.
pub fn classify_pattern(
    a: &PlanePrimitive,
    b: &PlanePrimitive,
    gravity: &GravityPrior,
    cfg: &PatternConfig,
) -> PatternEdge {
    classify_with_distance(a, b, primitive_distance(a, b), gravity, cfg)
}

pub(crate) fn classify_with_distance(
    a: &PlanePrimitive,
    b: &PlanePrimitive,
    distance: f64,
    gravity: &GravityPrior,
    cfg: &PatternConfig,
) -> PatternEdge {
    let edge = |i: usize, j: usize, pattern: Pattern, ratio: Option<f64>| PatternEdge {
        i,
        j,
        pattern,
        connection: pattern.connection(),
        ratio,
        distance,
    };
    match (a.is_horizontal, b.is_horizontal) {
        (false, false) => {
            let r = inner_ratio(a, b, cfg.eps_z * 0.5);
            edge(a.id.min(b.id), a.id.max(b.id), Pattern::P8, Some(r))
        }
        (true, true) => {
            let (ha, hb) = (a.height(gravity), b.height(gravity));
            let (host, other) = if ha > hb || (ha == hb && a.id < b.id) {
                (a, b)
            } else {
                (b, a)
            };
            let frame = host.frame();
            let lower: Vec<Point2<f64>> = other.hull.iter().map(|p| frame.to_2d(p)).collect();
            let overlap = intersection_area(&host.hull_2d(), &lower);
            if overlap > 0.0 {
                let r = (overlap / other.area()).clamp(0.0, 1.0);
                edge(host.id, other.id, Pattern::P7, Some(r))
            } else {
                edge(host.id, other.id, Pattern::P5, Some(0.0))
            }
        }
        _ => {
            let (host, other) = if a.is_horizontal { (a, b) } else { (b, a) };
            let (pattern, ratio) = classify_mixed(host, other, gravity, cfg);
            edge(host.id, other.id, pattern, ratio)
        }
    }
}

/// Horizontal `host`, non-horizontal `other`.
fn classify_mixed(
    host: &PlanePrimitive,
    other: &PlanePrimitive,
    gravity: &GravityPrior,
    cfg: &PatternConfig,
) -> (Pattern, Option<f64>) {
    let eps = cfg.eps_z;
    let band = eps * 0.25;
    let frame = host.frame();
    let hull2 = host.hull_2d();
    let heights: Vec<f64> = other.hull.iter().map(|p| host.signed_distance(p)).collect();
    let hmin = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let hmax = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let along = gravity.up().cross(&other.normal).normalize();

    // bands are anchored at the host plane when the hull reaches past it,
    // so one noisy extreme vertex does not shift them; a face hanging under
    // the host uses the host strip's half-width
    let contact = if hmax <= eps {
        band_extent(other, &heights, hmax.min(0.0) - eps * 0.5, true, &along)
    } else if hmin >= -eps {
        band_extent(other, &heights, hmin.max(0.0) + band, false, &along)
    } else {
        cross_section(other, &heights, &along)
    };
    let Some((c1, c2)) = contact else {
        return (Pattern::P5, Some(0.0));
    };
    let (q1, q2) = (frame.to_2d(&c1), frame.to_2d(&c2));
    let mid = Point2::from((q1.coords + q2.coords) * 0.5);
    let length = (q2 - q1).norm();
    let boundary = || {
        let r = strip_ratio(&hull2, &q1, &q2, eps * 0.5);
        if r >= cfg.tau {
            (Pattern::P6, Some(r))
        } else {
            (Pattern::P5, Some(r))
        }
    };

    let resting = hmax > eps && hmin >= -eps;
    if !resting {
        // under the plane, or passing through it
        if boundary_depth(&hull2, &mid) > eps {
            let r = compute_ratio(host, &Segment3::new(c1, c2)).unwrap_or(0.0);
            return (Pattern::P7, Some(r));
        }
        return boundary();
    }

    if length < eps {
        return if boundary_depth(&hull2, &mid) >= 0.0 {
            (Pattern::P1, None)
        } else {
            boundary()
        };
    }
    let in1 = boundary_depth(&hull2, &q1) > 0.0;
    let in2 = boundary_depth(&hull2, &q2) > 0.0;
    match (in1, in2) {
        (true, true) => (Pattern::P2, None),
        (true, false) | (false, true) => (Pattern::P3, None),
        (false, false) => match line_interval(&hull2, &q1, &(q2 - q1)) {
            Some((t0, t1)) if t0 < 1.0 && t1 > 0.0 && (t1 - t0) * length > band => (Pattern::P4, None),
            _ => boundary(),
        },
    }
}

/// Contact segment formed by the part of the hull above (`upper`) or below
/// the height `cut`, including the points where hull edges cross it, spread
/// along the horizontal direction `along`.
fn band_extent(
    prim: &PlanePrimitive,
    heights: &[f64],
    cut: f64,
    upper: bool,
    along: &Vector3<f64>,
) -> Option<(Point3<f64>, Point3<f64>)> {
    let n = prim.hull.len();
    let inside = |h: f64| if upper { h >= cut } else { h <= cut };
    let mut pts = Vec::new();
    for k in 0..n {
        let (ha, hb) = (heights[k], heights[(k + 1) % n]);
        if inside(ha) {
            pts.push(prim.hull[k]);
        }
        if inside(ha) != inside(hb) {
            let t = (cut - ha) / (hb - ha);
            pts.push(prim.hull[k] + (prim.hull[(k + 1) % n] - prim.hull[k]) * t);
        }
    }
    spread(&pts, along)
}

/// Where the hull of `prim` crosses the zero-height level.
fn cross_section(prim: &PlanePrimitive, heights: &[f64], along: &Vector3<f64>) -> Option<(Point3<f64>, Point3<f64>)> {
    let n = prim.hull.len();
    let mut pts = Vec::new();
    for k in 0..n {
        let (ha, hb) = (heights[k], heights[(k + 1) % n]);
        if ha == 0.0 {
            pts.push(prim.hull[k]);
        } else if (ha < 0.0) != (hb < 0.0) && hb != 0.0 {
            let t = ha / (ha - hb);
            pts.push(prim.hull[k] + (prim.hull[(k + 1) % n] - prim.hull[k]) * t);
        }
    }
    spread(&pts, along)
}

fn spread(pts: &[Point3<f64>], along: &Vector3<f64>) -> Option<(Point3<f64>, Point3<f64>)> {
    if pts.is_empty() {
        return None;
    }
    let mean = Point3::from(pts.iter().map(|p| p.coords).sum::<Vector3<f64>>() / pts.len() as f64);
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let s = (p - mean).dot(along);
        (lo.min(s), hi.max(s))
    });
    Some((mean + along * lo, mean + along * hi))
}

/// Ratio for two non-horizontal primitives: the hull parts of each lying
/// within `band` of the other's plane are spread along the planes'
/// intersection line and their overlap is compared to the longer extent.
/// Parallel planes give zero.
pub fn inner_ratio(a: &PlanePrimitive, b: &PlanePrimitive, band: f64) -> f64 {
    let line = a.normal.cross(&b.normal);
    if line.norm() < 5f64.to_radians().sin() {
        return 0.0;
    }
    let dir = line.normalize();
    let extent = |p: &PlanePrimitive, q: &PlanePrimitive| {
        p.hull
            .iter()
            .filter(|v| q.signed_distance(v).abs() <= band)
            .map(|v| dir.dot(&v.coords))
            .fold(None, |acc: Option<(f64, f64)>, s| {
                Some(acc.map_or((s, s), |(lo, hi)| (lo.min(s), hi.max(s))))
            })
    };
    let (Some((alo, ahi)), Some((blo, bhi))) = (extent(a, b), extent(b, a)) else {
        return 0.0;
    };
    let longest = (ahi - alo).max(bhi - blo);
    if longest < 1e-9 {
        return 0.0;
    }
    ((ahi.min(bhi) - alo.max(blo)).max(0.0) / longest).clamp(0.0, 1.0)
}
