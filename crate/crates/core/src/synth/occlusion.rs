use std::collections::HashMap;

use nalgebra::Point3;
#[cfg(test)]
use nalgebra::Vector3;

use super::scene::GroundTruth;
use crate::geometry::PointCloud;

/// Viewing position for [`render_occlusion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub eye: Point3<f64>,
    /// Angular bin size (rad).
    pub resolution: f64,
    /// Depth slack relative to the front point of a bin (m).
    pub depth_tolerance: f64,
}

impl Viewpoint {
    pub fn new(eye: Point3<f64>, resolution: f64) -> Self {
        Self {
            eye,
            resolution,
            depth_tolerance: 0.005,
        }
    }

    /// Cube-map cell of the viewing direction: the dominant axis picks the
    /// face, the other two coordinates divided by it are binned.
    fn bin(&self, p: &Point3<f64>) -> ([i64; 3], f64) {
        let d = p - self.eye;
        let m = d.iamax();
        let (a, b) = ((m + 1) % 3, (m + 2) % 3);
        let face = 2 * m as i64 + (d[m] < 0.0) as i64;
        let s = d[m].abs() * self.resolution;
        ([face, (d[a] / s).floor() as i64, (d[b] / s).floor() as i64], d.norm())
    }
}

/// Indices of the points visible from `view`. Each angular bin keeps its
/// nearest point and that point's surface id; a point is hidden when the
/// front point of its bin lies on another surface and is nearer by more than
/// the depth tolerance.
pub fn visible_points(points: &[Point3<f64>], surface: &[usize], view: &Viewpoint) -> Vec<usize> {
    let binned: Vec<([i64; 3], f64)> = points.iter().map(|p| view.bin(p)).collect();
    let mut front: HashMap<[i64; 3], (f64, usize)> = HashMap::new();
    for (i, &(k, r)) in binned.iter().enumerate() {
        let e = front.entry(k).or_insert((f64::INFINITY, usize::MAX));
        if r < e.0 {
            *e = (r, surface[i]);
        }
    }
    (0..points.len())
        .filter(|&i| {
            let (k, r) = binned[i];
            let (fr, fs) = front[&k];
            fs == surface[i] || r <= fr + view.depth_tolerance
        })
        .collect()
}

/// Drops the points hidden from `view` and the matching ground-truth rows.
pub fn render_occlusion(cloud: &PointCloud, gt: &GroundTruth, view: &Viewpoint) -> (PointCloud, GroundTruth) {
    let keep = visible_points(&cloud.points, &gt.point_primitive, view);
    (cloud.select(&keep), gt.select(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::scene::{generate_scene, SceneSpec};

    /// Analytic visibility: the point is snapped onto its noise-free face,
    /// lifted off it along the outward normal, and the segment to the eye is
    /// tested against every solid box.
    fn ray_cast_visible(scene: &crate::synth::SynthScene, eye: &Point3<f64>) -> Vec<bool> {
        let mut normals = vec![(Vector3::z(), 0.0)];
        for b in &scene.layout.boxes {
            for f in b.faces() {
                normals.push((f.normal, f.normal.dot(&f.corners[0].coords)));
            }
        }
        scene
            .cloud
            .points
            .iter()
            .zip(&scene.gt.point_primitive)
            .map(|(p, &prim)| {
                let (n, off) = normals[prim];
                let q = p - n * (n.dot(&p.coords) - off) + n * 1e-7;
                !scene.layout.boxes.iter().any(|b| b.blocks(&q, eye, 0.0))
            })
            .collect()
    }

    #[test]
    fn agrees_with_ray_cast_visibility() {
        for seed in [3u64, 8, 21] {
            let spec = SceneSpec {
                seed,
                object_count: 6,
                ..SceneSpec::default()
            };
            let scene = generate_scene(&spec).unwrap();
            let eye = spec.camera.eye();
            let oracle = ray_cast_visible(&scene, &eye);
            let view = Viewpoint::new(eye, spec.angular_resolution);
            let mut kept = vec![false; oracle.len()];
            for i in visible_points(&scene.cloud.points, &scene.gt.point_primitive, &view) {
                kept[i] = true;
            }
            let wrong = kept.iter().zip(&oracle).filter(|(a, b)| a != b).count();
            assert!(
                (wrong as f64) < 0.04 * oracle.len() as f64,
                "seed {seed}: {wrong} disagreements"
            );
        }
    }

    #[test]
    fn front_face_hides_back_face() {
        let view = Viewpoint::new(Point3::new(0.0, 0.0, 0.0), 0.01);
        let pts = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert_eq!(visible_points(&pts, &[0, 1, 2], &view), vec![0, 2]);
    }

    fn square(z: f64, n: usize) -> Vec<Point3<f64>> {
        (0..n * n)
            .map(|k| {
                let (i, j) = ((k / n) as f64, (k % n) as f64);
                Point3::new(-0.05 + 0.1 * i / (n - 1) as f64, -0.05 + 0.1 * j / (n - 1) as f64, z)
            })
            .collect()
    }

    #[test]
    fn view_from_above_drops_bottom_face() {
        let mut pts = square(0.1, 40);
        pts.extend(square(0.0, 40));
        let surface: Vec<usize> = (0..pts.len()).map(|i| i / 1600).collect();
        let view = Viewpoint::new(Point3::new(0.0, 0.0, 1.0), 0.004);
        let kept = visible_points(&pts, &surface, &view);
        assert_eq!(kept, (0..1600).collect::<Vec<_>>());
    }

    #[test]
    fn box_behind_larger_box_vanishes() {
        use crate::synth::scene::{scene_from_layout, BoxSpec, SceneLayout};
        use rand::SeedableRng;
        let layout = SceneLayout {
            table_size: [0.8, 0.6],
            boxes: vec![
                BoxSpec {
                    center: [0.0, -0.05],
                    half: [0.15, 0.05, 0.2],
                    yaw: 0.0,
                    base: 0.0,
                    supporter: 0,
                },
                BoxSpec {
                    center: [0.0, 0.1],
                    half: [0.03, 0.03, 0.03],
                    yaw: 0.0,
                    base: 0.0,
                    supporter: 0,
                },
            ],
        };
        let spec = SceneSpec {
            occlusion: true,
            camera: crate::synth::Camera {
                eye: [0.0, -0.8, 0.2],
                target: [0.0, 0.0, 0.1],
                ..Default::default()
            },
            angular_resolution: 0.008,
            ..SceneSpec::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let scene = scene_from_layout(&layout, &spec, &mut rng).unwrap();
        assert!(scene.gt.point_object.contains(&1));
        let left: Vec<_> = scene
            .cloud
            .points
            .iter()
            .zip(&scene.gt.point_object)
            .filter(|(_, &o)| o == 2)
            .map(|(p, _)| p)
            .collect();
        assert!(left.is_empty(), "{} {:?}", left.len(), &left[..left.len().min(5)]);
        assert_eq!(scene.gt.hierarchy.edges.len(), 3);
    }
}
