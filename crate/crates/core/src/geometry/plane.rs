use nalgebra::{Matrix3, Point2, Point3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::cloud::GravityPrior;
use super::hull::{convex_hull_2d, polygon_area};
use crate::error::{Error, Result};

/// Orthonormal 2D coordinate frame embedded in a plane. `u x v = normal`, so
/// counter-clockwise in the frame means counter-clockwise seen from the side
/// the normal points to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFrame {
    pub origin: Point3<f64>,
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl PlaneFrame {
    /// Frame depends only on the plane, never on the points in it.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Self {
        let axis = (0..3)
            .min_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
            .unwrap_or(0);
        let e = Vector3::ith(axis, 1.0);
        let u = (e - normal * normal.dot(&e)).normalize();
        let v = normal.cross(&u);
        Self {
            origin: Point3::from(-normal * offset),
            u,
            v,
            normal,
        }
    }

    pub fn to_2d(&self, p: &Point3<f64>) -> Point2<f64> {
        let d = p - self.origin;
        Point2::new(d.dot(&self.u), d.dot(&self.v))
    }

    pub fn to_3d(&self, q: &Point2<f64>) -> Point3<f64> {
        self.origin + self.u * q.x + self.v * q.y
    }
}

/// Least-squares plane through `points`: `(unit normal, offset, centroid)`.
/// `None` when the points do not span a plane.
pub fn fit_plane(points: &[Point3<f64>]) -> Option<(Vector3<f64>, f64, Point3<f64>)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let centroid = Point3::from(points.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let spread = eig.eigenvalues[order[2]];
    if !(spread > 0.0) || eig.eigenvalues[order[1]] <= 1e-12 * spread {
        return None;
    }
    let normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    Some((normal, -normal.dot(&centroid.coords), centroid))
}

/// A fitted plane with its inliers and convex boundary polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePrimitive {
    pub id: usize,
    pub normal: Vector3<f64>,
    /// Plane is `{x : normal . x + offset = 0}`.
    pub offset: f64,
    pub inliers: Vec<usize>,
    /// Convex boundary, counter-clockwise in [`PlanePrimitive::frame`].
    pub hull: Vec<Point3<f64>>,
    pub centroid: Point3<f64>,
    pub is_horizontal: bool,
}

impl PlanePrimitive {
    /// Builds a primitive from a plane and the points whose projections bound
    /// it. The normal is re-oriented: horizontal planes face `up`, all others
    /// face the sensor origin.
    pub fn from_plane(
        id: usize,
        normal: Vector3<f64>,
        offset: f64,
        inliers: Vec<usize>,
        boundary_points: &[Point3<f64>],
        gravity: &GravityPrior,
        horizontal_tolerance_deg: f64,
    ) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) {
            return Err(Error::Precondition("plane normal must be nonzero".into()));
        }
        let (mut normal, mut offset) = (normal / len, offset / len);
        let up = gravity.up();
        let is_horizontal = normal.dot(&up).abs() > horizontal_tolerance_deg.to_radians().cos();
        let flip = if is_horizontal {
            normal.dot(&up) < 0.0
        } else if offset.abs() > 1e-12 {
            // the origin sits on the positive side
            offset < 0.0
        } else {
            let k = (0..3).find(|&k| normal[k].abs() > 1e-12).unwrap_or(0);
            normal[k] < 0.0
        };
        if flip {
            normal = -normal;
            offset = -offset;
        }

        if boundary_points.is_empty() {
            return Err(Error::EmptyInput("primitive without points"));
        }
        let frame = PlaneFrame::new(normal, offset);
        let flat: Vec<Point2<f64>> = boundary_points.iter().map(|p| frame.to_2d(p)).collect();
        let hull2 = convex_hull_2d(&flat)?;
        let hull = hull2.iter().map(|q| frame.to_3d(q)).collect();
        let c2 = flat.iter().map(|q| q.coords).sum::<nalgebra::Vector2<f64>>() / flat.len() as f64;
        let centroid = frame.to_3d(&Point2::from(c2));

        Ok(Self {
            id,
            normal,
            offset,
            inliers,
            hull,
            centroid,
            is_horizontal,
        })
    }

    /// Primitive spanned exactly by a planar polygon (fixtures, tests).
    pub fn from_polygon(
        id: usize,
        vertices: &[Point3<f64>],
        gravity: &GravityPrior,
        horizontal_tolerance_deg: f64,
    ) -> Result<Self> {
        let (normal, offset, _) =
            fit_plane(vertices).ok_or_else(|| Error::DegenerateHull("polygon vertices do not span a plane".into()))?;
        Self::from_plane(
            id,
            normal,
            offset,
            Vec::new(),
            vertices,
            gravity,
            horizontal_tolerance_deg,
        )
    }

    pub fn frame(&self) -> PlaneFrame {
        PlaneFrame::new(self.normal, self.offset)
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }

    pub fn hull_2d(&self) -> Vec<Point2<f64>> {
        let frame = self.frame();
        self.hull.iter().map(|p| frame.to_2d(p)).collect()
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.hull_2d())
    }

    /// Height of the plane along `up`, taken at the hull centroid.
    pub fn height(&self, gravity: &GravityPrior) -> f64 {
        gravity.height(&self.centroid)
    }

    /// Radius of the smallest centroid-centred ball holding the hull.
    pub fn radius(&self) -> f64 {
        self.hull.iter().map(|p| (p - self.centroid).norm()).fold(0.0, f64::max)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point3<f64>, Point3<f64>)> + '_ {
        let n = self.hull.len();
        (0..n).map(move |i| (self.hull[i], self.hull[(i + 1) % n]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hull::is_convex_ccw;

    fn square(z: f64) -> Vec<Point3<f64>> {
        vec![
            Point3::new(0.0, 0.0, z),
            Point3::new(1.0, 0.0, z),
            Point3::new(1.0, 1.0, z),
            Point3::new(0.0, 1.0, z),
        ]
    }

    #[test]
    fn horizontal_normal_faces_up() {
        let g = GravityPrior::z_up();
        let mut pts = square(0.3);
        pts.reverse();
        let prim = PlanePrimitive::from_polygon(0, &pts, &g, 10.0).unwrap();
        assert!(prim.is_horizontal);
        assert!((prim.normal - Vector3::z()).norm() < 1e-12);
        assert!((prim.offset + 0.3).abs() < 1e-12);
        assert!(is_convex_ccw(&prim.hull_2d()));
        assert!((prim.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_normal_faces_origin() {
        let g = GravityPrior::z_up();
        let pts = vec![
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(2.0, 1.0, 0.0),
            Point3::new(2.0, 1.0, 1.0),
            Point3::new(2.0, 0.0, 1.0),
        ];
        let prim = PlanePrimitive::from_polygon(0, &pts, &g, 10.0).unwrap();
        assert!(!prim.is_horizontal);
        assert!(prim.offset > 0.0);
        assert!((prim.normal + Vector3::x()).norm() < 1e-12);
        for v in &prim.hull {
            assert!(prim.signed_distance(v).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_round_trip() {
        let n = Vector3::new(1.0, 2.0, 3.0).normalize();
        let f = PlaneFrame::new(n, -0.7);
        assert!((f.u.cross(&f.v) - n).norm() < 1e-12);
        let q = Point2::new(0.3, -1.2);
        let p = f.to_3d(&q);
        assert!((n.dot(&p.coords) - 0.7).abs() < 1e-12);
        assert!((f.to_2d(&p) - q).norm() < 1e-12);
    }

    #[test]
    fn collinear_fit_rejected() {
        let pts: Vec<_> = (0..10).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        assert!(fit_plane(&pts).is_none());
        assert!(fit_plane(&vec![Point3::new(1.0, 1.0, 1.0); 50]).is_none());
    }
}
