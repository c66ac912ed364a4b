use std::fmt::Write as _;

use super::{Connection, PatternGraph};

pub fn to_json(graph: &PatternGraph) -> serde_json::Result<String> {
    serde_json::to_string_pretty(graph)
}

pub fn from_json(text: &str) -> serde_json::Result<PatternGraph> {
    serde_json::from_str(text)
}

/// Undirected DOT rendering: support connections solid, inner ones dashed.
pub fn to_dot(graph: &PatternGraph) -> String {
    let mut out = String::from("graph patterns {\n  node [shape=circle];\n");
    for n in &graph.nodes {
        let _ = writeln!(out, "  p{n} [label=\"{n}\"];");
    }
    for e in &graph.edges {
        let style = match e.connection {
            Connection::LocalSupport => "solid",
            Connection::LocalInner => "dashed",
        };
        let _ = writeln!(out, "  p{} -- p{} [label=\"{}\", style={style}];", e.i, e.j, e.pattern);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{Pattern, PatternEdge};

    fn sample() -> PatternGraph {
        let edge = |i, j, pattern: Pattern, ratio| PatternEdge {
            i,
            j,
            pattern,
            connection: pattern.connection(),
            ratio,
            distance: 0.0,
        };
        PatternGraph {
            nodes: vec![0, 1, 2],
            edges: vec![edge(0, 1, Pattern::P2, None), edge(1, 2, Pattern::P8, Some(0.75))],
        }
    }

    #[test]
    fn json_round_trip() {
        let g = sample();
        let text = to_json(&g).unwrap();
        assert!(text.contains("\"pattern\": \"P8\""));
        assert!(text.contains("\"connection\": \"LocalSupport\""));
        assert_eq!(from_json(&text).unwrap(), g);
    }

    #[test]
    fn dot_styles() {
        let dot = to_dot(&sample());
        assert!(dot.contains("p0 -- p1 [label=\"P2\", style=solid]"));
        assert!(dot.contains("p1 -- p2 [label=\"P8\", style=dashed]"));
    }
}
