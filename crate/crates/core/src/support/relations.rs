use std::collections::HashMap;

use nalgebra::Point2;

use super::{SceneObject, SupportConfig};
use crate::geometry::bbox::ground_frame;
use crate::geometry::hull::intersection_area;
use crate::geometry::{GravityPrior, PlanePrimitive};
use crate::patterns::{Connection, PatternGraph};

/// Whether a primitive of `ci` supports a primitive of `cj` through a
/// support-class pattern edge (horizontal side in `ci`).
pub fn local_support(ci: &SceneObject, cj: &SceneObject, graph: &PatternGraph) -> bool {
    ci.id != cj.id
        && graph.edges.iter().any(|e| {
            e.connection == Connection::LocalSupport
                && ci.primitive_ids.contains(&e.i)
                && cj.primitive_ids.contains(&e.j)
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalEvidence {
    /// Supporting primitive id.
    pub primitive: usize,
    /// Ground-projected overlap of its hull with the bbox bottom (m^2).
    pub overlap: f64,
    /// Bbox bottom height minus plane height below the bbox centre (m).
    pub gap: f64,
}

/// Best horizontal primitive of `ci` holding up the bbox of `cj`: its plane
/// lies at most `eps_gap` below the bbox bottom (a quarter of that above is
/// tolerated for noise) and its hull covers at least `rho_min` of the bbox
/// bottom. The best candidate maximizes overlap, then minimizes the gap.
pub fn global_support(
    ci: &SceneObject,
    cj: &SceneObject,
    prims: &HashMap<usize, &PlanePrimitive>,
    gravity: &GravityPrior,
    cfg: &SupportConfig,
) -> Option<GlobalEvidence> {
    if ci.id == cj.id {
        return None;
    }
    let bottom_area = cj.bbox.bottom_area();
    candidates(ci, cj, prims, gravity)
        .filter(|ev| ev.gap <= cfg.eps_gap && ev.gap >= -0.25 * cfg.eps_gap)
        .filter(|ev| ev.overlap > 0.0 && ev.overlap >= cfg.rho_min * bottom_area)
        .min_by(|a, b| {
            b.overlap
                .total_cmp(&a.overlap)
                .then(a.gap.abs().total_cmp(&b.gap.abs()))
                .then(a.primitive.cmp(&b.primitive))
        })
}

/// Largest overlap of a horizontal primitive of `ci` with the bbox bottom of
/// `cj`, ignoring the gap.
pub fn support_overlap(
    ci: &SceneObject,
    cj: &SceneObject,
    prims: &HashMap<usize, &PlanePrimitive>,
    gravity: &GravityPrior,
) -> f64 {
    candidates(ci, cj, prims, gravity)
        .map(|ev| ev.overlap)
        .fold(0.0, f64::max)
}

fn candidates<'a>(
    ci: &'a SceneObject,
    cj: &'a SceneObject,
    prims: &'a HashMap<usize, &'a PlanePrimitive>,
    gravity: &'a GravityPrior,
) -> impl Iterator<Item = GlobalEvidence> + 'a {
    let frame = ground_frame(gravity);
    let up = gravity.up();
    let bottom: Vec<Point2<f64>> = cj.bbox.bottom_corners().iter().map(|c| frame.to_2d(c)).collect();
    let centre = cj.bbox.center;
    let bottom_height = cj.bbox.bottom_height();
    ci.primitive_ids
        .iter()
        .filter_map(move |id| prims.get(id))
        .filter(|p| p.is_horizontal)
        .map(move |p| {
            let hull: Vec<Point2<f64>> = p.hull.iter().map(|v| frame.to_2d(v)).collect();
            let t = -p.signed_distance(&centre) / p.normal.dot(&up);
            let plane_height = up.dot(&centre.coords) + t;
            GlobalEvidence {
                primitive: p.id,
                overlap: intersection_area(&hull, &bottom),
                gap: bottom_height - plane_height,
            }
        })
}

#[cfg(test)]
pub(crate) mod tests {
    use nalgebra::Point3;

    use super::*;
    use crate::geometry::object_bbox;
    use crate::patterns::{Pattern, PatternEdge};

    pub(crate) fn rect(id: usize, x: [f64; 2], y: [f64; 2], z: f64) -> PlanePrimitive {
        let v = [
            Point3::new(x[0], y[0], z),
            Point3::new(x[1], y[0], z),
            Point3::new(x[1], y[1], z),
            Point3::new(x[0], y[1], z),
        ];
        PlanePrimitive::from_polygon(id, &v, &GravityPrior::z_up(), 10.0).unwrap()
    }

    /// Top and four sides of an axis-aligned box, ids from `id0`.
    pub(crate) fn box_prims(id0: usize, x: [f64; 2], y: [f64; 2], z: [f64; 2]) -> Vec<PlanePrimitive> {
        let g = GravityPrior::z_up();
        let p = Point3::new;
        let sides = [
            [
                p(x[0], y[0], z[0]),
                p(x[1], y[0], z[0]),
                p(x[1], y[0], z[1]),
                p(x[0], y[0], z[1]),
            ],
            [
                p(x[0], y[1], z[0]),
                p(x[1], y[1], z[0]),
                p(x[1], y[1], z[1]),
                p(x[0], y[1], z[1]),
            ],
            [
                p(x[0], y[0], z[0]),
                p(x[0], y[1], z[0]),
                p(x[0], y[1], z[1]),
                p(x[0], y[0], z[1]),
            ],
            [
                p(x[1], y[0], z[0]),
                p(x[1], y[1], z[0]),
                p(x[1], y[1], z[1]),
                p(x[1], y[0], z[1]),
            ],
        ];
        std::iter::once(rect(id0, x, y, z[1]))
            .chain(
                sides
                    .iter()
                    .enumerate()
                    .map(|(k, s)| PlanePrimitive::from_polygon(id0 + 1 + k, s, &g, 10.0).unwrap()),
            )
            .collect()
    }

    pub(crate) fn object(id: usize, prims: &[&PlanePrimitive], ground: bool) -> SceneObject {
        SceneObject {
            id,
            primitive_ids: prims.iter().map(|p| p.id).collect(),
            bbox: object_bbox(prims, &GravityPrior::z_up(), 0.005).unwrap(),
            contains_ground: ground,
        }
    }

    fn edge(i: usize, j: usize, pattern: Pattern) -> PatternEdge {
        PatternEdge {
            i,
            j,
            pattern,
            connection: pattern.connection(),
            ratio: None,
            distance: 0.0,
        }
    }

    fn interval_overlap(a: [f64; 2], b: [f64; 2]) -> f64 {
        (a[1].min(b[1]) - a[0].max(b[0])).max(0.0)
    }

    /// Plate `[0,0.2]^2` at height 0 and a box of side 0.1 shifted by `dx`
    /// along x, its bottom `gap` above the plate.
    fn plate_and_box(dx: f64, gap: f64) -> (Vec<PlanePrimitive>, SceneObject, SceneObject) {
        let mut prims = vec![rect(0, [0.0, 0.2], [0.0, 0.2], 0.0)];
        prims.extend(box_prims(1, [0.15 + dx, 0.25 + dx], [0.05, 0.15], [gap, gap + 0.1]));
        let ci = object(0, &[&prims[0]], false);
        let refs: Vec<&PlanePrimitive> = prims[1..].iter().collect();
        let cj = object(1, &refs, false);
        (prims, ci, cj)
    }

    fn global(dx: f64, gap: f64) -> Option<GlobalEvidence> {
        let (prims, ci, cj) = plate_and_box(dx, gap);
        let by_id = prims.iter().map(|p| (p.id, p)).collect();
        global_support(&ci, &cj, &by_id, &GravityPrior::z_up(), &SupportConfig::default())
    }

    #[test]
    fn half_covered_bottom_is_supported() {
        // box x range [0.15, 0.25] over plate [0, 0.2]: half the bottom face
        let ev = global(0.0, 0.0).expect("supported");
        let want = interval_overlap([0.0, 0.2], [0.15, 0.25]) * interval_overlap([0.0, 0.2], [0.05, 0.15]);
        assert!((ev.overlap - want).abs() < 1e-12, "{} vs {want}", ev.overlap);
        assert_eq!(ev.primitive, 0);
    }

    #[test]
    fn tenth_covered_bottom_is_not_supported() {
        // x range [0.19, 0.29]: 10% over the plate, below rho_min = 0.3
        let (prims, ci, cj) = plate_and_box(0.04, 0.0);
        let by_id = prims.iter().map(|p| (p.id, p)).collect();
        let want = interval_overlap([0.0, 0.2], [0.19, 0.29]) * interval_overlap([0.0, 0.2], [0.05, 0.15]);
        assert!((want / cj.bbox.bottom_area() - 0.1).abs() < 1e-9);
        let overlap = support_overlap(&ci, &cj, &by_id, &GravityPrior::z_up());
        assert!((overlap - want).abs() < 1e-12);
        assert_eq!(global(0.04, 0.0), None);
    }

    #[test]
    fn floating_object_is_not_supported() {
        assert!(global(-0.1, 0.03).is_some());
        assert_eq!(global(-0.1, 0.1), None);
    }

    #[test]
    fn object_below_plane_is_not_supported() {
        assert_eq!(global(-0.1, -0.15), None);
    }

    #[test]
    fn local_support_is_directional() {
        let (prims, ci, cj) = plate_and_box(-0.1, 0.0);
        let graph = PatternGraph {
            nodes: prims.iter().map(|p| p.id).collect(),
            edges: vec![edge(0, 2, Pattern::P2)],
        };
        assert!(local_support(&ci, &cj, &graph));
        assert!(!local_support(&cj, &ci, &graph));
        assert!(!local_support(&ci, &ci, &graph));
    }

    #[test]
    fn inner_edges_are_not_support() {
        let (prims, ci, cj) = plate_and_box(-0.1, 0.0);
        let graph = PatternGraph {
            nodes: prims.iter().map(|p| p.id).collect(),
            edges: vec![edge(0, 2, Pattern::P8), edge(0, 3, Pattern::P6)],
        };
        assert!(!local_support(&ci, &cj, &graph));
    }
}
