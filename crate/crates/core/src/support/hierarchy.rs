use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::relations::{global_support, support_overlap};
use super::{Phase, SceneHierarchyGraph, SceneObject, SuppEdge, SupportConfig};
use crate::error::Result;
use crate::geometry::{GravityPrior, PlanePrimitive};
use crate::patterns::{Connection, PatternGraph};

/// Support inference in three phases: local support from pattern edges,
/// global (bbox) support for pairs without a local edge, then the root for
/// every object left without a supporter. Cycles left after the second
/// phase are broken by dropping their weakest edge.
pub fn infer_hierarchy(
    objects: Vec<SceneObject>,
    graph: &PatternGraph,
    prims: &[PlanePrimitive],
    gravity: &GravityPrior,
    cfg: &SupportConfig,
) -> Result<SceneHierarchyGraph> {
    let k = objects.len();
    let object_of: HashMap<usize, usize> = objects
        .iter()
        .flat_map(|o| o.primitive_ids.iter().map(move |&p| (p, o.id)))
        .collect();
    let by_id: HashMap<usize, &PlanePrimitive> = prims.iter().map(|p| (p.id, p)).collect();
    let mut edges: BTreeMap<(usize, usize), Phase> = BTreeMap::new();

    for e in graph.edges.iter().filter(|e| e.connection == Connection::LocalSupport) {
        let (Some(&oi), Some(&oj)) = (object_of.get(&e.i), object_of.get(&e.j)) else {
            continue;
        };
        if oi != oj && !objects[oj].contains_ground {
            edges.insert((oi, oj), Phase::Local);
        }
    }

    let mut global = Vec::new();
    for cj in objects.iter().filter(|o| !o.contains_ground) {
        let best = objects
            .iter()
            .filter(|ci| ci.id != cj.id && !edges.contains_key(&(ci.id, cj.id)))
            .filter_map(|ci| global_support(ci, cj, &by_id, gravity, cfg).map(|ev| (ci.id, ev)))
            .min_by(|(ia, a), (ib, b)| {
                b.overlap
                    .total_cmp(&a.overlap)
                    .then(a.gap.abs().total_cmp(&b.gap.abs()))
                    .then(ia.cmp(ib))
            });
        if let Some((ci, _)) = best {
            global.push((ci, cj.id));
        }
    }
    for pair in global {
        edges.insert(pair, Phase::Global);
    }

    while let Some(cycle) = find_cycle(k, edges.keys().copied()) {
        let weakest = cycle
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let ea = support_overlap(&objects[a.0], &objects[a.1], &by_id, gravity);
                let eb = support_overlap(&objects[b.0], &objects[b.1], &by_id, gravity);
                ea.total_cmp(&eb).then(b.cmp(&a))
            })
            .expect("cycles are nonempty");
        log::warn!("support cycle {:?}; dropping {} -> {}", cycle, weakest.0, weakest.1);
        edges.remove(&weakest);
    }

    let supported: BTreeSet<usize> = edges.keys().map(|&(_, to)| to).collect();
    for o in &objects {
        if !supported.contains(&o.id) {
            edges.insert((k, o.id), Phase::Root);
        }
    }

    let primitive_level = graph
        .edges
        .iter()
        .filter(|e| object_of.get(&e.i).is_some() && object_of.get(&e.i) == object_of.get(&e.j))
        .cloned()
        .collect();
    let g = SceneHierarchyGraph {
        objects,
        root: k,
        edges: edges
            .into_iter()
            .map(|((from, to), phase)| SuppEdge { from, to, phase })
            .collect(),
        primitive_level,
    };
    g.validate()?;
    Ok(g)
}

/// Edges of some directed cycle among nodes `0..k`, if one exists.
fn find_cycle(k: usize, edges: impl Iterator<Item = (usize, usize)>) -> Option<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); k];
    for (a, b) in edges {
        if a < k && b < k {
            adj[a].push(b);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; k];
    let mut parent = vec![usize::MAX; k];
    for s in 0..k {
        if state[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        state[s] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < adj[u].len() {
                let w = adj[u][*next];
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        parent[w] = u;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![(u, w)];
                        let mut x = u;
                        while x != w {
                            cycle.push((parent[x], x));
                            x = parent[x];
                        }
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    None
}
