use nalgebra::{Point3, Vector2};

use super::hull::{boundary_depth, line_interval};
use super::plane::PlanePrimitive;

/// A 3D segment `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment3 {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
}

impl Segment3 {
    pub fn new(a: Point3<f64>, b: Point3<f64>) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn midpoint(&self) -> Point3<f64> {
        Point3::from((self.a.coords + self.b.coords) * 0.5)
    }
}

/// Closest distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance(p1: &Point3<f64>, q1: &Point3<f64>, p2: &Point3<f64>, q2: &Point3<f64>) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let eps = 1e-30;
    let (s, t);
    if a <= eps && e <= eps {
        return r.norm();
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > eps * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Distance from `p` to the closed polygon of `prim` when the orthogonal
/// projection of `p` lands inside it.
fn point_face_distance(p: &Point3<f64>, prim: &PlanePrimitive, hull2: &[nalgebra::Point2<f64>]) -> Option<f64> {
    let frame = prim.frame();
    let q = frame.to_2d(p);
    (boundary_depth(hull2, &q) >= 0.0).then(|| prim.signed_distance(p).abs())
}

fn edge_pierces(a: &Point3<f64>, b: &Point3<f64>, prim: &PlanePrimitive, hull2: &[nalgebra::Point2<f64>]) -> bool {
    let da = prim.signed_distance(a);
    let db = prim.signed_distance(b);
    if da * db > 0.0 || da == db {
        return false;
    }
    let t = da / (da - db);
    let x = a + (b - a) * t;
    boundary_depth(hull2, &prim.frame().to_2d(&x)) >= 0.0
}

/// Minimum Euclidean distance between the hull polygons of two primitives,
/// zero when they touch or intersect.
pub fn primitive_distance(a: &PlanePrimitive, b: &PlanePrimitive) -> f64 {
    let ha = a.hull_2d();
    let hb = b.hull_2d();
    if a.edges().any(|(p, q)| edge_pierces(&p, &q, b, &hb)) || b.edges().any(|(p, q)| edge_pierces(&p, &q, a, &ha)) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p1, q1) in a.edges() {
        for (p2, q2) in b.edges() {
            best = best.min(segment_segment_distance(&p1, &q1, &p2, &q2));
        }
    }
    for v in &a.hull {
        if let Some(d) = point_face_distance(v, b, &hb) {
            best = best.min(d);
        }
    }
    for v in &b.hull {
        if let Some(d) = point_face_distance(v, a, &ha) {
            best = best.min(d);
        }
    }
    best
}

/// Lower bound on [`primitive_distance`] from bounding balls.
pub fn distance_lower_bound(a: &PlanePrimitive, b: &PlanePrimitive) -> f64 {
    ((a.centroid - b.centroid).norm() - a.radius() - b.radius()).max(0.0)
}

/// Intersections of the line through `segment`, after orthogonal projection
/// onto `prim`'s plane, with the hull boundary: zero, one (tangent) or two
/// points, ordered along `segment.a -> segment.b`. Segments with an endpoint
/// farther than `eps_proj` from the plane do not lie on it and yield nothing.
pub fn segment_hull_intersections(segment: &Segment3, prim: &PlanePrimitive, eps_proj: f64) -> Vec<Point3<f64>> {
    if prim.signed_distance(&segment.a).abs() > eps_proj || prim.signed_distance(&segment.b).abs() > eps_proj {
        return Vec::new();
    }
    let frame = prim.frame();
    let qa = frame.to_2d(&segment.a);
    let qb = frame.to_2d(&segment.b);
    let dir: Vector2<f64> = qb - qa;
    if dir.norm() < 1e-12 {
        return Vec::new();
    }
    let hull = prim.hull_2d();
    match line_interval(&hull, &qa, &dir) {
        None => Vec::new(),
        Some((t0, t1)) if (t1 - t0) * dir.norm() <= 1e-12 => {
            vec![frame.to_3d(&(qa + dir * t0))]
        }
        Some((t0, t1)) => vec![frame.to_3d(&(qa + dir * t0)), frame.to_3d(&(qa + dir * t1))],
    }
}
