//! Primitive adjacency graph and pairwise structural patterns.

pub mod adjacency;
pub mod classify;
pub mod export;
pub mod ratio;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{GravityPrior, PlanePrimitive};

pub use adjacency::{build_adjacency, AdjacencyGraph};
pub use classify::classify_pattern;
pub use ratio::{compute_ratio, is_watertight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
}

impl Pattern {
    pub const ALL: [Pattern; 8] = [
        Pattern::P1,
        Pattern::P2,
        Pattern::P3,
        Pattern::P4,
        Pattern::P5,
        Pattern::P6,
        Pattern::P7,
        Pattern::P8,
    ];

    /// 1-based pattern number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(k: u8) -> Option<Self> {
        Self::ALL.get(usize::from(k).checked_sub(1)?).copied()
    }

    pub fn connection(self) -> Connection {
        if self.number() <= 5 {
            Connection::LocalSupport
        } else {
            Connection::LocalInner
        }
    }

    /// Whether edges of this pattern carry a ratio.
    pub fn has_ratio(self) -> bool {
        self.number() >= 5
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connection {
    LocalSupport,
    LocalInner,
}

/// Classified adjacency edge. For P1-P7, `i` is the horizontal plane; for
/// P8 the pair is ordered by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternEdge {
    pub i: usize,
    pub j: usize,
    pub pattern: Pattern,
    pub connection: Connection,
    pub ratio: Option<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatternConfig {
    /// Adjacency threshold (m).
    pub theta_adj: f64,
    /// Watertightness threshold on the ratio.
    pub tau: f64,
    /// Vertical tolerance for "rests on" / "under" / "spatially close" (m).
    pub eps_z: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            theta_adj: 0.02,
            tau: 0.86,
            eps_z: 0.02,
        }
    }
}

/// Adjacency graph with every edge classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternGraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<PatternEdge>,
}

impl PatternGraph {
    pub fn build(prims: &[PlanePrimitive], gravity: &GravityPrior, cfg: &PatternConfig) -> Self {
        let adj = build_adjacency(prims, cfg.theta_adj);
        let index: std::collections::HashMap<usize, usize> = prims.iter().enumerate().map(|(k, p)| (p.id, k)).collect();
        let edges = adj
            .edges
            .par_iter()
            .map(|&(a, b, d)| classify::classify_with_distance(&prims[index[&a]], &prims[index[&b]], d, gravity, cfg))
            .collect();
        Self {
            nodes: adj.vertices,
            edges,
        }
    }
}
