use nalgebra::{Point2, Point3, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{segment_hull_intersections, PlanePrimitive, Segment3};

/// Contact edges shorter than this are rejected.
pub const MIN_EDGE_LENGTH: f64 = 1e-6;

/// Ratio of a contact edge `q1q2` against the horizontal primitive `horiz`:
/// the edge is projected onto the plane, its line meets the hull boundary at
/// `p1` (nearer `q1`) and `p2`, and the result is
/// `min(|overlap| / |p1p2|, |overlap| / |q1q2|)` where `overlap` is the part
/// of `q1q2` inside the chord `p1p2`. When `q1` lies before `p1` and `q2`
/// inside the chord, `overlap = p1q2`. Zero when the line misses the hull.
pub fn compute_ratio(horiz: &PlanePrimitive, contact: &Segment3) -> Result<f64> {
    let project = |p: &Point3<f64>| p - horiz.normal * horiz.signed_distance(p);
    let seg = Segment3::new(project(&contact.a), project(&contact.b));
    let len = seg.length();
    if len < MIN_EDGE_LENGTH {
        return Err(Error::DegenerateEdge(len));
    }
    let hits = segment_hull_intersections(&seg, horiz, f64::INFINITY);
    let [p1, p2] = match hits.as_slice() {
        [p1, p2] => [*p1, *p2],
        _ => return Ok(0.0),
    };
    let dir = (seg.b - seg.a) / len;
    let s1 = (p1 - seg.a).dot(&dir);
    let s2 = (p2 - seg.a).dot(&dir);
    let chord = s2 - s1;
    let overlap = (s2.min(len) - s1.max(0.0)).max(0.0);
    if chord <= 0.0 {
        return Ok(0.0);
    }
    Ok((overlap / chord).min(overlap / len).clamp(0.0, 1.0))
}

pub fn is_watertight(ratio: f64, tau: f64) -> bool {
    ratio >= tau
}

/// Ratio of a contact segment `c1c2` lying near the boundary of a convex
/// polygon. The host extent is the part of the polygon within `half_width`
/// of the contact line, so contacts running just outside a noisy edge still
/// register. Returns `min(overlap / host, overlap / contact)`.
pub fn strip_ratio(host: &[Point2<f64>], c1: &Point2<f64>, c2: &Point2<f64>, half_width: f64) -> f64 {
    let d = c2 - c1;
    let len = d.norm();
    if len < MIN_EDGE_LENGTH {
        return 0.0;
    }
    let dir = d / len;
    let perp = Vector2::new(-dir.y, dir.x);
    let off = perp.dot(&c1.coords);
    let clipped = clip_halfplane(host, &perp, off + half_width);
    let clipped = clip_halfplane(&clipped, &-perp, -(off - half_width));
    if clipped.is_empty() {
        return 0.0;
    }
    let s0 = dir.dot(&c1.coords);
    let (lo, hi) = clipped.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let s = dir.dot(&p.coords) - s0;
        (lo.min(s), hi.max(s))
    });
    let host_len = hi - lo;
    let overlap = (hi.min(len) - lo.max(0.0)).max(0.0);
    if host_len < MIN_EDGE_LENGTH {
        return 0.0;
    }
    (overlap / host_len).min(overlap / len).clamp(0.0, 1.0)
}

/// Part of `poly` where `n . x <= c`.
fn clip_halfplane(poly: &[Point2<f64>], n: &Vector2<f64>, c: f64) -> Vec<Point2<f64>> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let k = poly.len();
    for i in 0..k {
        let a = poly[i];
        let b = poly[(i + 1) % k];
        let fa = n.dot(&a.coords) - c;
        let fb = n.dot(&b.coords) - c;
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            out.push(a + (b - a) * (fa / (fa - fb)));
        }
    }
    out
}
