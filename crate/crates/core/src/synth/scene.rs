use nalgebra::{Point2, Point3, Vector2, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::camera::Camera;
use super::occlusion::{render_occlusion, Viewpoint};
use crate::error::{Error, Result};
use crate::geometry::hull::{intersection_area, point_segment_distance};
use crate::geometry::{Bbox, PointCloud};
use crate::support::{Phase, SceneHierarchyGraph, SceneObject, SuppEdge};

/// Parameters of a random tabletop scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    /// Table size along x and y (m); the table top is `z = 0`.
    pub table_size: [f64; 2],
    pub object_count: usize,
    /// Chance that a new box is stacked on an existing one.
    pub stack_probability: f64,
    /// Largest number of boxes in one stack.
    pub max_stack_depth: usize,
    /// Range of box edge lengths (m).
    pub box_size: [f64; 2],
    /// Smallest horizontal gap between boxes on the same support (m).
    pub min_gap: f64,
    /// Smallest distance from a stacked box to its supporter's top edges (m).
    pub stack_inset: f64,
    /// Smallest distance from a box to the table edge (m).
    pub table_margin: f64,
    /// Std of the noise added along face normals (m).
    pub noise_sigma: f64,
    /// Sampling density (points per m^2) before the per-face caps.
    pub density: f64,
    pub face_point_cap: usize,
    pub table_point_cap: usize,
    pub camera: Camera,
    /// Keep only points seen from the camera eye.
    pub occlusion: bool,
    /// Angular bin size of the occlusion z-buffer (rad).
    pub angular_resolution: f64,
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            table_size: [0.8, 0.6],
            object_count: 6,
            stack_probability: 0.35,
            max_stack_depth: 3,
            box_size: [0.06, 0.16],
            min_gap: 0.03,
            stack_inset: 0.015,
            table_margin: 0.03,
            noise_sigma: 0.001,
            density: 2.5e5,
            face_point_cap: 10000,
            table_point_cap: 40000,
            camera: Camera::default(),
            occlusion: false,
            angular_resolution: 0.006,
            max_retries: 500,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.table_size[0],
            self.table_size[1],
            self.box_size[0],
            self.density,
            self.angular_resolution,
        ];
        if pos.iter().any(|v| !(*v > 0.0)) || self.box_size[1] < self.box_size[0] {
            return Err(Error::Config("scene extents and density must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.stack_probability) || self.noise_sigma < 0.0 {
            return Err(Error::Config("stack probability or noise out of range".into()));
        }
        Ok(())
    }
}

/// Yaw-rotated box resting at height `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub center: [f64; 2],
    /// Half sizes along the box's own x, y and z axes (m).
    pub half: [f64; 3],
    pub yaw: f64,
    pub base: f64,
    /// Object id of the supporter; 0 is the table.
    pub supporter: usize,
}

/// Planar rectangle with its outward normal, corners counter-clockwise seen
/// from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub corners: [Point3<f64>; 4],
    pub normal: Vector3<f64>,
}

impl BoxSpec {
    pub fn axes(&self) -> (Vector2<f64>, Vector2<f64>) {
        let (s, c) = self.yaw.sin_cos();
        (Vector2::new(c, s), Vector2::new(-s, c))
    }

    pub fn top(&self) -> f64 {
        self.base + 2.0 * self.half[2]
    }

    pub fn footprint(&self) -> [Point2<f64>; 4] {
        let (a, b) = self.axes();
        let c = Point2::from(self.center);
        let (u, v) = (a * self.half[0], b * self.half[1]);
        [c - u - v, c + u - v, c + u + v, c - u + v]
    }

    /// Whether `p` lies inside the footprint shrunk by `margin`.
    pub fn covers(&self, p: &Point2<f64>, margin: f64) -> bool {
        let (a, b) = self.axes();
        let d = p - Point2::from(self.center);
        d.dot(&a).abs() <= self.half[0] - margin && d.dot(&b).abs() <= self.half[1] - margin
    }

    /// Top face followed by the four sides. The bottom is never visible.
    pub fn faces(&self) -> Vec<Face> {
        let fp = self.footprint();
        let lo = |p: &Point2<f64>| Point3::new(p.x, p.y, self.base);
        let hi = |p: &Point2<f64>| Point3::new(p.x, p.y, self.top());
        let mut faces = vec![Face {
            corners: [hi(&fp[0]), hi(&fp[1]), hi(&fp[2]), hi(&fp[3])],
            normal: Vector3::z(),
        }];
        for k in 0..4 {
            let (p, q) = (fp[k], fp[(k + 1) % 4]);
            let e = q - p;
            faces.push(Face {
                corners: [lo(&p), lo(&q), hi(&q), hi(&p)],
                normal: Vector3::new(e.y, -e.x, 0.0).normalize(),
            });
        }
        faces
    }

    pub fn bbox(&self) -> Bbox {
        let (a, b) = self.axes();
        Bbox {
            center: Point3::new(self.center[0], self.center[1], self.base + self.half[2]),
            half_extents: Vector3::from(self.half),
            axes: [Vector3::new(a.x, a.y, 0.0), Vector3::new(b.x, b.y, 0.0), Vector3::z()],
        }
    }

    /// Whether the segment `a -> b` passes through the solid box, ignoring
    /// its first `skip` meters.
    pub fn blocks(&self, a: &Point3<f64>, b: &Point3<f64>, skip: f64) -> bool {
        let bb = self.bbox();
        let d = b - a;
        let len = d.norm();
        if len <= skip {
            return false;
        }
        let (mut t0, mut t1) = (skip / len, 1.0f64);
        for k in 0..3 {
            let ax = bb.axes[k];
            let o = (a - bb.center).dot(&ax);
            let dd = d.dot(&ax);
            let h = bb.half_extents[k];
            if dd.abs() < 1e-15 {
                if o.abs() > h {
                    return false;
                }
                continue;
            }
            let (mut ta, mut tb) = ((-h - o) / dd, (h - o) / dd);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

/// Gap between two convex CCW polygons; zero when they overlap.
pub fn polygon_gap(a: &[Point2<f64>], b: &[Point2<f64>]) -> f64 {
    if intersection_area(a, b) > 0.0 {
        return 0.0;
    }
    let side = |p: &[Point2<f64>], q: &[Point2<f64>]| {
        p.iter()
            .flat_map(|v| (0..q.len()).map(move |k| point_segment_distance(v, &q[k], &q[(k + 1) % q.len()])))
            .fold(f64::INFINITY, f64::min)
    };
    side(a, b).min(side(b, a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneLayout {
    pub table_size: [f64; 2],
    pub boxes: Vec<BoxSpec>,
}

impl SceneLayout {
    /// Number of boxes under box `k` (0 for a box on the table).
    fn depth(&self, k: usize) -> usize {
        let mut d = 0;
        let mut s = self.boxes[k].supporter;
        while s != 0 {
            d += 1;
            s = self.boxes[s - 1].supporter;
        }
        d
    }

    fn table_polygon(&self) -> [Point2<f64>; 4] {
        let (hx, hy) = (self.table_size[0] * 0.5, self.table_size[1] * 0.5);
        [
            Point2::new(-hx, -hy),
            Point2::new(hx, -hy),
            Point2::new(hx, hy),
            Point2::new(-hx, hy),
        ]
    }
}

impl SceneLayout {
    /// Default table with one box on it and a smaller box on top of that.
    pub fn two_box_stack() -> Self {
        Self {
            table_size: [0.8, 0.6],
            boxes: vec![
                BoxSpec {
                    center: [0.0, 0.05],
                    half: [0.08, 0.06, 0.05],
                    yaw: 0.0,
                    base: 0.0,
                    supporter: 0,
                },
                BoxSpec {
                    center: [0.01, 0.05],
                    half: [0.05, 0.04, 0.03],
                    yaw: 0.3,
                    base: 0.1,
                    supporter: 1,
                },
            ],
        }
    }
}

/// Random box layout by rejection sampling. A layout that gets stuck is
/// discarded and started again, up to `LAYOUT_RESTARTS` times.
pub fn random_layout(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Result<SceneLayout> {
    spec.validate()?;
    let mut last = None;
    for _ in 0..LAYOUT_RESTARTS {
        match try_layout(spec, rng) {
            Ok(l) => return Ok(l),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

const LAYOUT_RESTARTS: usize = 20;

fn try_layout(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Result<SceneLayout> {
    let mut layout = SceneLayout {
        table_size: spec.table_size,
        boxes: Vec::new(),
    };
    let [smin, smax] = spec.box_size;
    for k in 0..spec.object_count {
        let mut placed = None;
        for _ in 0..spec.max_retries {
            let eligible: Vec<usize> = (0..layout.boxes.len())
                .filter(|&b| {
                    let bx = &layout.boxes[b];
                    layout.depth(b) + 2 <= spec.max_stack_depth
                        && 2.0 * bx.half[0].min(bx.half[1]) - 2.0 * spec.stack_inset >= smin
                })
                .collect();
            let stack = !eligible.is_empty() && rng.random_bool(spec.stack_probability);
            let cand = if stack {
                let s = eligible[rng.random_range(0..eligible.len())];
                let sup = &layout.boxes[s];
                let room = 2.0 * sup.half[0].min(sup.half[1]) - 2.0 * spec.stack_inset;
                let top = room.min(smax);
                let yaw = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
                let w = rng.random_range(smin..=top);
                let d = rng.random_range(smin..=top);
                let h = rng.random_range(smin..=smax);
                let (a, b) = sup.axes();
                let off =
                    a * rng.random_range(-sup.half[0]..=sup.half[0]) + b * rng.random_range(-sup.half[1]..=sup.half[1]);
                BoxSpec {
                    center: [sup.center[0] + off.x, sup.center[1] + off.y],
                    half: [w * 0.5, d * 0.5, h * 0.5],
                    yaw,
                    base: sup.top(),
                    supporter: s + 1,
                }
            } else {
                let (hx, hy) = (spec.table_size[0] * 0.5, spec.table_size[1] * 0.5);
                BoxSpec {
                    center: [rng.random_range(-hx..=hx), rng.random_range(-hy..=hy)],
                    half: [
                        rng.random_range(smin..=smax) * 0.5,
                        rng.random_range(smin..=smax) * 0.5,
                        rng.random_range(smin..=smax) * 0.5,
                    ],
                    yaw: rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
                    base: 0.0,
                    supporter: 0,
                }
            };
            if fits(&layout, &cand, spec) {
                placed = Some(cand);
                break;
            }
        }
        match placed {
            Some(b) => layout.boxes.push(b),
            None => {
                return Err(Error::Generation {
                    seed: spec.seed,
                    reason: format!("could not place box {} after {} tries", k + 1, spec.max_retries),
                })
            }
        }
    }
    Ok(layout)
}

fn fits(layout: &SceneLayout, cand: &BoxSpec, spec: &SceneSpec) -> bool {
    let fp = cand.footprint();
    let inside = if cand.supporter == 0 {
        let (hx, hy) = (layout.table_size[0] * 0.5, layout.table_size[1] * 0.5);
        fp.iter()
            .all(|p| p.x.abs() <= hx - spec.table_margin && p.y.abs() <= hy - spec.table_margin)
    } else {
        let sup = &layout.boxes[cand.supporter - 1];
        fp.iter().all(|p| sup.covers(p, spec.stack_inset))
    };
    inside
        && layout
            .boxes
            .iter()
            .filter(|b| b.supporter == cand.supporter)
            .all(|b| polygon_gap(&b.footprint(), &fp) >= spec.min_gap)
}

/// Per-point and per-object ground truth of a synthetic scene. Object 0 is
/// the table; box `k` of the layout is object `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub point_primitive: Vec<usize>,
    pub point_object: Vec<usize>,
    /// Object of each generating face (primitive).
    pub primitive_object: Vec<usize>,
    pub hierarchy: SceneHierarchyGraph,
    pub ground_object: usize,
}

impl GroundTruth {
    /// Supporter -> supportee pairs between objects (root excluded).
    pub fn support_pairs(&self) -> Vec<(usize, usize)> {
        self.hierarchy
            .edges
            .iter()
            .filter(|e| e.from != self.hierarchy.root)
            .map(|e| (e.from, e.to))
            .collect()
    }

    /// Keeps the points listed in `keep`, in order.
    pub fn select(&self, keep: &[usize]) -> Self {
        Self {
            point_primitive: keep.iter().map(|&i| self.point_primitive[i]).collect(),
            point_object: keep.iter().map(|&i| self.point_object[i]).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub cloud: PointCloud,
    pub gt: GroundTruth,
    pub layout: SceneLayout,
    pub camera: Camera,
}

impl SynthScene {
    /// Ground-truth label mask seen from the scene camera (object id + 1).
    pub fn gt_mask(&self) -> crate::eval::SegmentationMask {
        let labels: Vec<u32> = self.gt.point_object.iter().map(|&o| o as u32 + 1).collect();
        self.camera.render_labels(&self.cloud.points, &labels)
    }
}

/// Random scene for `spec` (layout, sampling and noise all from `spec.seed`).
pub fn generate_scene(spec: &SceneSpec) -> Result<SynthScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let layout = random_layout(spec, &mut rng)?;
    scene_from_layout(&layout, spec, &mut rng)
}

/// Samples the visible surfaces of `layout`.
pub fn scene_from_layout(layout: &SceneLayout, spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Result<SynthScene> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.noise_sigma.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut points = Vec::new();
    let mut point_primitive = Vec::new();
    let mut point_object = Vec::new();
    let mut primitive_object = Vec::new();

    let resting_on =
        |object: usize| -> Vec<&BoxSpec> { layout.boxes.iter().filter(|b| b.supporter == object).collect() };
    let table = layout.table_polygon();
    let table_face = Face {
        corners: table.map(|p| Point3::new(p.x, p.y, 0.0)),
        normal: Vector3::z(),
    };
    let mut emit = |face: &Face, object: usize, cover: &[&BoxSpec], cap: usize, rng: &mut ChaCha8Rng| {
        let prim = primitive_object.len();
        primitive_object.push(object);
        let e1 = face.corners[1] - face.corners[0];
        let e2 = face.corners[3] - face.corners[0];
        let area = e1.norm() * e2.norm();
        let covered: f64 = cover.iter().map(|b| 4.0 * b.half[0] * b.half[1]).sum();
        let target = (((area - covered).max(0.0) * spec.density) as usize).min(cap);
        let mut made = 0;
        let mut tries = 0;
        while made < target && tries < target * 20 + 100 {
            tries += 1;
            let p = face.corners[0] + e1 * rng.random::<f64>() + e2 * rng.random::<f64>();
            if cover.iter().any(|b| b.covers(&Point2::new(p.x, p.y), 0.0)) {
                continue;
            }
            let jitter = if spec.noise_sigma > 0.0 { noise.sample(rng) } else { 0.0 };
            points.push(p + face.normal * jitter);
            point_primitive.push(prim);
            point_object.push(object);
            made += 1;
        }
    };

    emit(&table_face, 0, &resting_on(0), spec.table_point_cap, rng);
    for (k, b) in layout.boxes.iter().enumerate() {
        let object = k + 1;
        let faces = b.faces();
        emit(&faces[0], object, &resting_on(object), spec.face_point_cap, rng);
        for f in &faces[1..] {
            emit(f, object, &[], spec.face_point_cap, rng);
        }
    }

    let gt = GroundTruth {
        point_primitive,
        point_object,
        hierarchy: layout_hierarchy(layout, &primitive_object),
        primitive_object,
        ground_object: 0,
    };
    let mut scene = SynthScene {
        cloud: PointCloud::new(points),
        gt,
        layout: layout.clone(),
        camera: spec.camera,
    };
    if spec.occlusion {
        let view = Viewpoint::new(spec.camera.eye(), spec.angular_resolution);
        let (cloud, gt) = render_occlusion(&scene.cloud, &scene.gt, &view);
        scene.cloud = cloud;
        scene.gt = gt;
    }
    Ok(scene)
}

fn layout_hierarchy(layout: &SceneLayout, primitive_object: &[usize]) -> SceneHierarchyGraph {
    let k = layout.boxes.len() + 1;
    let prims_of = |o: usize| -> Vec<usize> {
        (0..primitive_object.len())
            .filter(|&p| primitive_object[p] == o)
            .collect()
    };
    let (hx, hy) = (layout.table_size[0] * 0.5, layout.table_size[1] * 0.5);
    let mut objects = vec![SceneObject {
        id: 0,
        primitive_ids: prims_of(0),
        bbox: Bbox {
            center: Point3::origin(),
            half_extents: Vector3::new(hx, hy, 0.005),
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
        },
        contains_ground: true,
    }];
    let mut edges = vec![SuppEdge {
        from: k,
        to: 0,
        phase: Phase::Root,
    }];
    for (i, b) in layout.boxes.iter().enumerate() {
        objects.push(SceneObject {
            id: i + 1,
            primitive_ids: prims_of(i + 1),
            bbox: b.bbox(),
            contains_ground: false,
        });
        edges.push(SuppEdge {
            from: b.supporter,
            to: i + 1,
            phase: Phase::Local,
        });
    }
    edges.sort();
    SceneHierarchyGraph {
        objects,
        root: k,
        edges,
        primitive_level: Vec::new(),
    }
}
