//! Random pattern graphs and an enumeration oracle for solver checks.

use rand::Rng;

use super::fsum::fsum;
use super::{build_qip, objective_fast, terms, QipConstants, QipInstance};
use crate::patterns::{Pattern, PatternEdge, PatternGraph};

/// Random classified graph on `n` nodes: each pair is an edge with
/// probability one half, with a uniform pattern, ratio and distance.
pub fn random_pattern_graph<R: Rng>(rng: &mut R, n: usize, theta_adj: f64) -> PatternGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !rng.random_bool(0.5) {
                continue;
            }
            let pattern = Pattern::ALL[rng.random_range(0..8)];
            let (i, j) = if pattern != Pattern::P8 && rng.random_bool(0.5) {
                (b, a)
            } else {
                (a, b)
            };
            edges.push(PatternEdge {
                i,
                j,
                pattern,
                connection: pattern.connection(),
                ratio: pattern.has_ratio().then(|| rng.random_range(0.0..=1.0)),
                distance: rng.random_range(0.0..=theta_adj),
            });
        }
    }
    PatternGraph {
        nodes: (0..n).collect(),
        edges,
    }
}

/// Random instance with between 1 and `max_n` vertices and default constants.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize) -> QipInstance {
    let n = rng.random_range(1..=max_n);
    let c = QipConstants::default();
    build_qip(&random_pattern_graph(rng, n, c.theta_adj), &c).expect("generated graphs are well formed")
}

/// Maximum objective over every feasible assignment of the `n^n` label
/// vectors. Candidates within a small margin of the running best are
/// re-scored with exact summation, so the result equals the maximum of
/// `objective_value`.
pub fn brute_force_max(inst: &QipInstance) -> f64 {
    let n = inst.n;
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    let mut best_fast = f64::NEG_INFINITY;
    enumerate(inst, 0, &mut labels, &mut best, &mut best_fast);
    best
}

fn enumerate(inst: &QipInstance, v: usize, labels: &mut Vec<usize>, best: &mut f64, best_fast: &mut f64) {
    if v == inst.n {
        let fast = objective_fast(inst, labels);
        if fast >= *best_fast - 1e-6 {
            let exact = fsum(terms(inst, labels, 0..inst.n, inst.pairs.iter()));
            if exact > *best {
                *best = exact;
            }
            *best_fast = best_fast.max(fast);
        }
        return;
    }
    for l in 0..inst.n {
        if inst.is_excluded(v, l) {
            continue;
        }
        labels[v] = l;
        enumerate(inst, v + 1, labels, best, best_fast);
    }
}
