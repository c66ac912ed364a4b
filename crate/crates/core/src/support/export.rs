use std::fmt::Write as _;

use super::SceneHierarchyGraph;
use crate::error::{Error, Result};
use crate::patterns::Connection;

pub fn to_json(graph: &SceneHierarchyGraph) -> serde_json::Result<String> {
    serde_json::to_string_pretty(graph)
}

pub fn from_json(text: &str) -> Result<SceneHierarchyGraph> {
    let g: SceneHierarchyGraph = serde_json::from_str(text)?;
    g.validate()?;
    Ok(g)
}

fn node_name(graph: &SceneHierarchyGraph, node: usize) -> String {
    if node == graph.root {
        "root".into()
    } else {
        format!("C{node}")
    }
}

/// Object-level digraph. The root is left out when it has a single child.
/// With `primitives`, each object becomes a cluster holding its primitives
/// and the pattern edges among them.
pub fn to_dot(graph: &SceneHierarchyGraph, primitives: bool) -> String {
    let root_children = graph.edges.iter().filter(|e| e.from == graph.root).count();
    let show_root = root_children != 1;
    let mut out = String::from("digraph hierarchy {\n  compound=true;\n");
    if show_root {
        out.push_str("  root [shape=doublecircle];\n");
    }
    for o in &graph.objects {
        let shape = if o.contains_ground { "box" } else { "ellipse" };
        if primitives {
            let _ = writeln!(out, "  subgraph cluster_C{} {{\n    label=\"C{}\";", o.id, o.id);
            let _ = writeln!(out, "    C{} [shape={shape}];", o.id);
            for p in &o.primitive_ids {
                let _ = writeln!(out, "    p{p} [shape=point, xlabel=\"{p}\"];");
            }
            for e in graph.primitive_level.iter().filter(|e| o.primitive_ids.contains(&e.i)) {
                let style = match e.connection {
                    Connection::LocalSupport => "solid",
                    Connection::LocalInner => "dashed",
                };
                let _ = writeln!(out, "    p{} -> p{} [dir=none, style={style}];", e.i, e.j);
            }
            out.push_str("  }\n");
        } else {
            let _ = writeln!(out, "  C{} [shape={shape}];", o.id);
        }
    }
    for e in &graph.edges {
        if e.from == graph.root && !show_root {
            continue;
        }
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            node_name(graph, e.from),
            node_name(graph, e.to),
            format!("{:?}", e.phase).to_lowercase()
        );
    }
    out.push_str("}\n");
    out
}

/// Affinity matrix as CSV with a header row and column of node names.
pub fn affinity_csv(graph: &SceneHierarchyGraph) -> String {
    let names: Vec<String> = std::iter::once("root".to_string())
        .chain(graph.objects.iter().map(|o| format!("C{}", o.id)))
        .collect();
    let mut out = String::from("supported\\supporting");
    for n in &names {
        let _ = write!(out, ",{n}");
    }
    out.push('\n');
    for (row, name) in graph.affinity_matrix().iter().zip(&names) {
        out.push_str(name);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Parses [`affinity_csv`] output back to a matrix.
pub fn parse_affinity_csv(text: &str) -> Result<Vec<Vec<u8>>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .skip(1)
                .map(|v| {
                    v.trim()
                        .parse::<u8>()
                        .map_err(|e| Error::Parse(format!("affinity entry {v:?}: {e}")))
                })
                .collect()
        })
        .collect()
}
