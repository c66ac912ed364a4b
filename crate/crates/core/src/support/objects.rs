use std::collections::{BTreeMap, HashMap};

use super::{SceneObject, SupportConfig};
use crate::error::Result;
use crate::geometry::{object_bbox, GravityPrior, PlanePrimitive};
use crate::labeling::{LabelAssignment, QipInstance};
use crate::patterns::PatternGraph;

/// Id of the ground primitive: the explicit one if given, otherwise the
/// lowest horizontal primitive whose hull area reaches `ground_min_area`.
pub fn find_ground(prims: &[PlanePrimitive], gravity: &GravityPrior, cfg: &SupportConfig) -> Option<usize> {
    if let Some(id) = cfg.ground_id {
        return prims.iter().any(|p| p.id == id).then_some(id);
    }
    prims
        .iter()
        .filter(|p| p.is_horizontal && p.area() >= cfg.ground_min_area)
        .min_by(|a, b| a.height(gravity).total_cmp(&b.height(gravity)).then(a.id.cmp(&b.id)))
        .map(|p| p.id)
}

/// One object per label, further split into pieces connected by pattern
/// edges (a label shared by primitives that never touch yields one object
/// per touching group). Objects are numbered in order of their first
/// primitive in `prims`.
pub fn assemble_objects(
    assignment: &LabelAssignment,
    inst: &QipInstance,
    prims: &[PlanePrimitive],
    graph: &PatternGraph,
    gravity: &GravityPrior,
    cfg: &SupportConfig,
) -> Result<Vec<SceneObject>> {
    let label: HashMap<usize, usize> = assignment.by_primitive(inst).into_iter().collect();
    // union-find over primitive ids joined by same-label pattern edges
    let mut parent: BTreeMap<usize, usize> = prims.iter().map(|p| (p.id, p.id)).collect();
    fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
        let mut r = x;
        while parent[&r] != r {
            r = parent[&r];
        }
        let mut c = x;
        while parent[&c] != r {
            let next = parent[&c];
            parent.insert(c, r);
            c = next;
        }
        r
    }
    for e in &graph.edges {
        if label.contains_key(&e.i) && label.get(&e.i) == label.get(&e.j) {
            let (ri, rj) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if ri != rj {
                parent.insert(ri.max(rj), ri.min(rj));
            }
        }
    }

    let ground = find_ground(prims, gravity, cfg);
    if ground.is_none() {
        log::warn!("no ground plane found; unsupported objects attach to the root");
    }
    let mut order: Vec<usize> = Vec::new();
    let mut groups: HashMap<usize, Vec<&PlanePrimitive>> = HashMap::new();
    for p in prims {
        let r = find(&mut parent, p.id);
        let members = groups.entry(r).or_default();
        if members.is_empty() {
            order.push(r);
        }
        members.push(p);
    }
    order
        .iter()
        .enumerate()
        .map(|(id, r)| {
            let members = &groups[r];
            Ok(SceneObject {
                id,
                primitive_ids: members.iter().map(|p| p.id).collect(),
                bbox: object_bbox(members, gravity, cfg.min_half_extent)?,
                contains_ground: ground.is_some_and(|g| members.iter().any(|p| p.id == g)),
            })
        })
        .collect()
}
