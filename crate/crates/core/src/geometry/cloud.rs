use std::collections::HashSet;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 3D point cloud in meters, optionally carrying depth-image provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    /// `(row, col)` of the depth pixel each point was back-projected from.
    pub pixels: Option<Vec<[u32; 2]>>,
    /// Carried through IO only; inference never looks at color.
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self {
            points,
            pixels: None,
            colors: None,
        }
    }

    pub fn with_pixels(mut self, pixels: Vec<[u32; 2]>) -> Result<Self> {
        if pixels.len() != self.points.len() {
            return Err(Error::Shape(format!(
                "{} pixels for {} points",
                pixels.len(),
                self.points.len()
            )));
        }
        let mut seen = HashSet::with_capacity(pixels.len());
        if !pixels.iter().all(|p| seen.insert(*p)) {
            return Err(Error::Precondition("pixel mapping must be injective".into()));
        }
        self.pixels = Some(pixels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self
            .points
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(Error::Precondition(format!("point {i} is not finite")));
        }
        if let Some(px) = &self.pixels {
            if px.len() != self.points.len() {
                return Err(Error::Shape("pixel list length differs from point count".into()));
            }
        }
        if let Some(c) = &self.colors {
            if c.len() != self.points.len() {
                return Err(Error::Shape("color list length differs from point count".into()));
            }
        }
        Ok(())
    }

    /// Keeps the points at `indices` (in the given order) together with their
    /// per-point attributes.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            pixels: self.pixels.as_ref().map(|px| indices.iter().map(|&i| px[i]).collect()),
            colors: self.colors.as_ref().map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }
}

/// Known ground normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct GravityPrior {
    up: Vector3<f64>,
}

impl GravityPrior {
    pub fn new(up: Vector3<f64>) -> Result<Self> {
        let n = up.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::Precondition("gravity vector must be nonzero".into()));
        }
        Ok(Self { up: up / n })
    }

    pub fn z_up() -> Self {
        Self { up: Vector3::z() }
    }

    pub fn up(&self) -> Vector3<f64> {
        self.up
    }

    pub fn height(&self, p: &Point3<f64>) -> f64 {
        self.up.dot(&p.coords)
    }
}

impl Default for GravityPrior {
    fn default() -> Self {
        Self::z_up()
    }
}

impl TryFrom<[f64; 3]> for GravityPrior {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(Vector3::new(v[0], v[1], v[2]))
    }
}

impl From<GravityPrior> for [f64; 3] {
    fn from(g: GravityPrior) -> Self {
        [g.up.x, g.up.y, g.up.z]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixels_must_be_injective() {
        let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)]);
        assert!(cloud.clone().with_pixels(vec![[0, 0], [0, 0]]).is_err());
        assert!(cloud.with_pixels(vec![[0, 0], [0, 1]]).is_ok());
    }

    #[test]
    fn gravity_is_normalized() {
        let g = GravityPrior::new(Vector3::new(0.0, 0.0, 5.0)).unwrap();
        assert_eq!(g.up(), Vector3::z());
        assert!(GravityPrior::new(Vector3::zeros()).is_err());
    }

    #[test]
    fn non_finite_points_rejected() {
        let cloud = PointCloud::new(vec![Point3::new(f64::NAN, 0.0, 0.0)]);
        assert!(cloud.validate().is_err());
    }
}
