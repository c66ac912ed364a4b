//! Planar polygon helpers: monotone-chain hull, convex clipping, line/polygon
//! intersection and minimum-area rectangles. Every polygon here is convex and
//! counter-clockwise unless stated otherwise.

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};

fn cross(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Minimal convex polygon containing `points`, counter-clockwise, with no
/// three consecutive collinear vertices.
pub fn convex_hull_2d(points: &[Point2<f64>]) -> Result<Vec<Point2<f64>>> {
    if points.len() < 3 {
        return Err(Error::DegenerateHull(format!("{} points", points.len())));
    }
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();

    let (lo, hi) = pts.iter().fold(
        (Vector2::repeat(f64::INFINITY), Vector2::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(&p.coords), hi.sup(&p.coords)),
    );
    let scale = (hi - lo).amax().max(f64::MIN_POSITIVE);
    // Cross products below this are treated as collinear.
    let tol = 1e-12 * scale * scale;

    let mut hull: Vec<Point2<f64>> = Vec::with_capacity(pts.len() + 1);
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(Error::DegenerateHull("points are collinear".into()));
    }
    Ok(hull)
}

/// Signed shoelace area (positive for counter-clockwise polygons).
pub fn polygon_area(poly: &[Point2<f64>]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        * 0.5
}

pub fn is_convex_ccw(poly: &[Point2<f64>]) -> bool {
    let n = poly.len();
    n >= 3 && (0..n).all(|i| cross(&poly[i], &poly[(i + 1) % n], &poly[(i + 2) % n]) > 0.0)
}

pub fn point_segment_distance(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to the polygon boundary, positive when `p` is inside.
pub fn boundary_depth(poly: &[Point2<f64>], p: &Point2<f64>) -> f64 {
    let n = poly.len();
    let mut inside = n >= 3;
    let mut nearest = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if cross(&a, &b, p) < 0.0 {
            inside = false;
        }
        nearest = nearest.min(point_segment_distance(p, &a, &b));
    }
    if inside {
        nearest
    } else {
        -nearest
    }
}

pub fn contains(poly: &[Point2<f64>], p: &Point2<f64>) -> bool {
    boundary_depth(poly, p) > 0.0
}

/// Parameter interval `[t0, t1]` over which the line `origin + t * dir`
/// lies inside the convex polygon (Cyrus-Beck). `None` when the line misses.
pub fn line_interval(poly: &[Point2<f64>], origin: &Point2<f64>, dir: &Vector2<f64>) -> Option<(f64, f64)> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        // inward normal of a CCW edge
        let inward = Vector2::new(-e.y, e.x);
        let num = inward.dot(&(origin - a));
        let den = inward.dot(dir);
        if den.abs() < 1e-15 * inward.norm() * dir.norm().max(1e-300) {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let t = -num / den;
        if den > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Sutherland-Hodgman intersection of two convex CCW polygons.
pub fn clip_convex(subject: &[Point2<f64>], clip: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let cur_in = cross(&a, &b, &cur) >= 0.0;
            let prev_in = cross(&a, &b, &prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(segment_line_hit(&prev, &cur, &a, &b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(segment_line_hit(&prev, &cur, &a, &b));
            }
        }
    }
    output
}

fn segment_line_hit(p: &Point2<f64>, q: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> Point2<f64> {
    let dp = cross(a, b, p);
    let dq = cross(a, b, q);
    let t = dp / (dp - dq);
    p + (q - p) * t
}

pub fn intersection_area(a: &[Point2<f64>], b: &[Point2<f64>]) -> f64 {
    polygon_area(&clip_convex(a, b)).max(0.0)
}

/// Oriented rectangle in a plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub center: Point2<f64>,
    /// Unit direction of the first side.
    pub axis: Vector2<f64>,
    pub half: Vector2<f64>,
}

impl Rect2 {
    pub fn area(&self) -> f64 {
        4.0 * self.half.x * self.half.y
    }

    pub fn corners(&self) -> [Point2<f64>; 4] {
        let u = self.axis * self.half.x;
        let v = Vector2::new(-self.axis.y, self.axis.x) * self.half.y;
        [
            self.center - u - v,
            self.center + u - v,
            self.center + u + v,
            self.center - u + v,
        ]
    }
}

/// Minimum-area enclosing rectangle. One side of the optimum is flush with a
/// hull edge, so every edge direction is tried. Collinear or coincident
/// input yields a zero-width rectangle along the principal extent.
pub fn min_area_rect(points: &[Point2<f64>]) -> Result<Rect2> {
    if points.is_empty() {
        return Err(Error::EmptyInput("rectangle of no points"));
    }
    let candidates: Vec<Vector2<f64>> = match convex_hull_2d(points) {
        Ok(hull) => (0..hull.len())
            .filter_map(|i| (hull[(i + 1) % hull.len()] - hull[i]).try_normalize(0.0))
            .collect(),
        Err(_) => {
            let far = points
                .iter()
                .map(|p| (p - points[0]).norm())
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            vec![(points[far] - points[0]).try_normalize(0.0).unwrap_or_else(Vector2::x)]
        }
    };

    let mut best: Option<Rect2> = None;
    for axis in candidates {
        let perp = Vector2::new(-axis.y, axis.x);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            let u = p.coords.dot(&axis);
            let v = p.coords.dot(&perp);
            u0 = u0.min(u);
            u1 = u1.max(u);
            v0 = v0.min(v);
            v1 = v1.max(v);
        }
        let rect = Rect2 {
            center: Point2::from(axis * (u0 + u1) * 0.5 + perp * (v0 + v1) * 0.5),
            axis,
            half: Vector2::new((u1 - u0) * 0.5, (v1 - v0) * 0.5),
        };
        if best.is_none_or(|b| rect.area() < b.area()) {
            best = Some(rect);
        }
    }
    best.ok_or(Error::EmptyInput("rectangle of no points"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn unit_square() -> Vec<Point2<f64>> {
        vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]
    }

    #[test]
    fn square_with_interior_point() {
        let mut pts = unit_square();
        pts.push(p(0.5, 0.5));
        let hull = convex_hull_2d(&pts).unwrap();
        assert_eq!(hull, unit_square());
    }

    #[test]
    fn pentagon_keeps_all_vertices() {
        let pent: Vec<_> = (0..5)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 5.0;
                p(a.cos(), a.sin())
            })
            .collect();
        let hull = convex_hull_2d(&pent).unwrap();
        assert_eq!(hull.len(), 5);
        assert!(is_convex_ccw(&hull));
        for v in &pent {
            assert!(hull.iter().any(|h| (h - v).norm() < 1e-15));
        }
    }

    #[test]
    fn collinear_points_drop_midpoints() {
        let pts = vec![p(0.0, 0.0), p(0.5, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert_eq!(convex_hull_2d(&pts).unwrap().len(), 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            convex_hull_2d(&[p(0.0, 0.0), p(1.0, 1.0)]),
            Err(Error::DegenerateHull(_))
        ));
        assert!(matches!(
            convex_hull_2d(&[p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0), p(3.0, 3.0)]),
            Err(Error::DegenerateHull(_))
        ));
    }

    #[test]
    fn line_interval_through_square() {
        let sq = unit_square();
        let (t0, t1) = line_interval(&sq, &p(-1.0, 0.5), &Vector2::new(1.0, 0.0)).unwrap();
        assert!((t0 - 1.0).abs() < 1e-12 && (t1 - 2.0).abs() < 1e-12);
        assert!(line_interval(&sq, &p(-1.0, 2.0), &Vector2::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn clipped_area_of_shifted_squares() {
        let a = unit_square();
        let b: Vec<_> = a.iter().map(|q| q + Vector2::new(0.5, 0.0)).collect();
        assert!((intersection_area(&a, &b) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_depth_sign() {
        let sq = unit_square();
        assert!((boundary_depth(&sq, &p(0.5, 0.5)) - 0.5).abs() < 1e-12);
        assert!((boundary_depth(&sq, &p(2.0, 0.5)) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_rect_of_rotated_rectangle() {
        let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
        let pts: Vec<_> = [(-1.0, -0.5), (1.0, -0.5), (1.0, 0.5), (-1.0, 0.5)]
            .iter()
            .map(|&(x, y)| p(c * x - s * y, s * x + c * y))
            .collect();
        let r = min_area_rect(&pts).unwrap();
        assert!((r.area() - 2.0).abs() < 1e-9);
    }
}
