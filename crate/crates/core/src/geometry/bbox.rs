use nalgebra::{Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::cloud::GravityPrior;
use super::hull::{min_area_rect, Rect2};
use super::plane::{PlaneFrame, PlanePrimitive};
use crate::error::{Error, Result};

/// Gravity-aligned oriented box. `axes[2]` is `up`; `half_extents[k]` is the
/// half size along `axes[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub center: Point3<f64>,
    pub half_extents: Vector3<f64>,
    pub axes: [Vector3<f64>; 3],
}

impl Bbox {
    pub fn bottom_height(&self) -> f64 {
        self.axes[2].dot(&self.center.coords) - self.half_extents.z
    }

    pub fn top_height(&self) -> f64 {
        self.axes[2].dot(&self.center.coords) + self.half_extents.z
    }

    pub fn bottom_area(&self) -> f64 {
        4.0 * self.half_extents.x * self.half_extents.y
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    /// Bottom-face corners, counter-clockwise seen from above.
    pub fn bottom_corners(&self) -> [Point3<f64>; 4] {
        let c = self.center - self.axes[2] * self.half_extents.z;
        let u = self.axes[0] * self.half_extents.x;
        let v = self.axes[1] * self.half_extents.y;
        [c - u - v, c + u - v, c + u + v, c - u + v]
    }

    pub fn contains(&self, p: &Point3<f64>, slack: f64) -> bool {
        let d = p - self.center;
        (0..3).all(|k| d.dot(&self.axes[k]).abs() <= self.half_extents[k] + slack)
    }
}

/// Horizontal frame of the ground plane through the origin.
pub fn ground_frame(gravity: &GravityPrior) -> PlaneFrame {
    PlaneFrame::new(gravity.up(), 0.0)
}

/// Gravity-aligned box around every hull vertex of `prims`, oriented by the
/// minimum-area rectangle of the vertices projected on the ground. Extents
/// never drop below `min_half_extent`.
pub fn object_bbox(prims: &[&PlanePrimitive], gravity: &GravityPrior, min_half_extent: f64) -> Result<Bbox> {
    if prims.is_empty() {
        return Err(Error::EmptyInput("bounding box of no primitives"));
    }
    let up = gravity.up();
    let frame = ground_frame(gravity);
    let verts: Vec<Point3<f64>> = prims.iter().flat_map(|p| p.hull.iter().copied()).collect();
    let flat: Vec<Point2<f64>> = verts.iter().map(|p| frame.to_2d(p)).collect();
    let rect: Rect2 = min_area_rect(&flat)?;
    let (lo, hi) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let h = up.dot(&p.coords);
        (lo.min(h), hi.max(h))
    });

    let a0 = frame.u * rect.axis.x + frame.v * rect.axis.y;
    let a1 = up.cross(&a0);
    let center2 = frame.to_3d(&rect.center);
    let center = center2 + up * ((lo + hi) * 0.5);
    Ok(Bbox {
        center,
        half_extents: Vector3::new(
            rect.half.x.max(min_half_extent),
            rect.half.y.max(min_half_extent),
            ((hi - lo) * 0.5).max(min_half_extent),
        ),
        axes: [a0, a1, up],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face(pts: [[f64; 3]; 4]) -> PlanePrimitive {
        let v: Vec<_> = pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        PlanePrimitive::from_polygon(0, &v, &GravityPrior::z_up(), 10.0).unwrap()
    }

    #[test]
    fn unit_cube_faces() {
        let faces = [
            face([[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.]]),
            face([[0., 0., 1.], [1., 0., 1.], [1., 1., 1.], [0., 1., 1.]]),
            face([[0., 0., 0.], [1., 0., 0.], [1., 0., 1.], [0., 0., 1.]]),
            face([[0., 1., 0.], [1., 1., 0.], [1., 1., 1.], [0., 1., 1.]]),
            face([[0., 0., 0.], [0., 1., 0.], [0., 1., 1.], [0., 0., 1.]]),
            face([[1., 0., 0.], [1., 1., 0.], [1., 1., 1.], [1., 0., 1.]]),
        ];
        let refs: Vec<_> = faces.iter().collect();
        let bb = object_bbox(&refs, &GravityPrior::z_up(), 0.005).unwrap();
        for k in 0..3 {
            assert!((bb.half_extents[k] - 0.5).abs() < 1e-12);
        }
        assert!((bb.center - Point3::new(0.5, 0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn flat_square_is_clamped() {
        let sq = face([[0., 0., 1.], [1., 0., 1.], [1., 1., 1.], [0., 1., 1.]]);
        let bb = object_bbox(&[&sq], &GravityPrior::z_up(), 0.005).unwrap();
        assert_eq!(bb.half_extents.z, 0.005);
        assert!((bb.bottom_height() - 0.995).abs() < 1e-12);
    }

    #[test]
    fn empty_is_error() {
        assert!(object_bbox(&[], &GravityPrior::z_up(), 0.005).is_err());
    }

    #[test]
    fn vertical_face_gets_thin_box() {
        let wall = face([[0., 0., 0.], [1., 0., 0.], [1., 0., 1.], [0., 0., 1.]]);
        let bb = object_bbox(&[&wall], &GravityPrior::z_up(), 0.005).unwrap();
        let mut h = [bb.half_extents.x, bb.half_extents.y];
        h.sort_by(f64::total_cmp);
        assert_eq!(h[0], 0.005);
        assert!((h[1] - 0.5).abs() < 1e-12);
        for v in &wall.hull {
            assert!(bb.contains(v, 1e-9));
        }
    }
}
