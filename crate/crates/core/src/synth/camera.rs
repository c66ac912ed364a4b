use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::eval::SegmentationMask;

/// Pinhole camera looking from `eye` at `target`, with world `+z` up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub eye: [f64; 3],
    pub target: [f64; 3],
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            eye: [0.0, -0.7, 0.75],
            target: [0.0, 0.05, 0.0],
            width: 640,
            height: 480,
            fx: 525.0,
            fy: 525.0,
            cx: 319.5,
            cy: 239.5,
        }
    }
}

impl Camera {
    pub fn eye(&self) -> Point3<f64> {
        Point3::from(self.eye)
    }

    /// `(right, down, forward)` unit vectors.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let forward = (Point3::from(self.target) - self.eye()).normalize();
        let right = forward.cross(&Vector3::z()).normalize();
        let down = forward.cross(&right);
        (right, down, forward)
    }

    /// Camera-frame coordinates (x right, y down, z forward).
    pub fn to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        let (r, d, f) = self.basis();
        let v = p - self.eye();
        Point3::new(r.dot(&v), d.dot(&v), f.dot(&v))
    }

    /// Pixel `(row, col)` containing `p` and its depth, if visible.
    pub fn pixel(&self, p: &Point3<f64>) -> Option<(u32, u32, f64)> {
        let c = self.to_camera(p);
        if c.z <= 1e-9 {
            return None;
        }
        let col = (self.fx * c.x / c.z + self.cx).round();
        let row = (self.fy * c.y / c.z + self.cy).round();
        (col >= 0.0 && row >= 0.0 && col < self.width as f64 && row < self.height as f64)
            .then_some((row as u32, col as u32, c.z))
    }

    /// Label image of `points`: each point is splatted over a 3x3 pixel
    /// block and the nearest point wins each pixel.
    pub fn render_labels(&self, points: &[Point3<f64>], labels: &[u32]) -> SegmentationMask {
        let (w, h) = (self.width, self.height);
        let mut depth = vec![f64::INFINITY; (w * h) as usize];
        let mut mask = SegmentationMask::new(w, h);
        for (p, &l) in points.iter().zip(labels) {
            let Some((row, col, z)) = self.pixel(p) else {
                continue;
            };
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (r, c) = (row as i64 + dr, col as i64 + dc);
                    if r < 0 || c < 0 || r >= h as i64 || c >= w as i64 {
                        continue;
                    }
                    let k = (r as u32 * w + c as u32) as usize;
                    // the centre pixel beats splats at equal depth
                    let z = if dr == 0 && dc == 0 { z } else { z + 1e-6 };
                    if z < depth[k] {
                        depth[k] = z;
                        mask.labels[k] = l;
                    }
                }
            }
        }
        mask
    }
}
