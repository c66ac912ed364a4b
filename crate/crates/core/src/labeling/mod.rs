//! Quadratic integer program assigning one label per primitive.

pub mod exact;
pub mod fsum;
pub mod heuristic;
pub mod random;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{Pattern, PatternGraph};

pub use exact::{solve_exact, DEFAULT_EXACT_CAP};
pub use heuristic::solve_heuristic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QipConstants {
    pub d0: f64,
    pub f0: f64,
    pub f1: f64,
    pub w_d: f64,
    pub w_r: f64,
    pub delta: f64,
    pub theta_adj: f64,
}

impl Default for QipConstants {
    fn default() -> Self {
        Self {
            d0: 1.0,
            f0: 1.0,
            f1: 1000.0,
            w_d: 0.3,
            w_r: 0.7,
            delta: 0.2,
            theta_adj: 0.02,
        }
    }
}

/// Signed ratio: kept when at least `delta`, negated below it.
pub fn f_transform(rto: f64, delta: f64) -> f64 {
    if rto >= delta {
        rto
    } else {
        -rto
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QipPair {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Vertices and labels are both indexed `0..n`; label `k` is the label
/// "owned" by vertex `k`. `ids[k]` is the primitive id of vertex `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QipInstance {
    pub n: usize,
    pub ids: Vec<usize>,
    /// Row-major `n x n` data weights, `data[v * n + l]`.
    pub data: Vec<f64>,
    /// Hard exclusions, same layout as `data`.
    pub excluded: Vec<bool>,
    /// One entry per adjacency edge, `a < b`.
    pub pairs: Vec<QipPair>,
    pub constants: QipConstants,
}

impl QipInstance {
    pub fn empty(ids: Vec<usize>, constants: QipConstants) -> Self {
        let n = ids.len();
        Self {
            n,
            ids,
            data: vec![0.0; n * n],
            excluded: vec![false; n * n],
            pairs: Vec::new(),
            constants,
        }
    }

    pub fn data_at(&self, v: usize, l: usize) -> f64 {
        self.data[v * self.n + l]
    }

    pub fn is_excluded(&self, v: usize, l: usize) -> bool {
        self.excluded[v * self.n + l]
    }

    fn add_data(&mut self, v: usize, l: usize, w: f64) {
        self.data[v * self.n + l] += w;
    }

    fn exclude(&mut self, v: usize, l: usize) {
        self.excluded[v * self.n + l] = true;
        self.data[v * self.n + l] = 0.0;
    }

    /// Adds `weight` to the pair `(a, b)`, creating it if needed.
    pub fn add_pair(&mut self, a: usize, b: usize, weight: f64) {
        let (a, b) = (a.min(b), a.max(b));
        match self.pairs.iter_mut().find(|p| p.a == a && p.b == b) {
            Some(p) => p.weight += weight,
            None => self.pairs.push(QipPair { a, b, weight }),
        }
    }

    /// Neighbor lists over `pairs`.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for p in &self.pairs {
            adj[p.a].push(p.b);
            adj[p.b].push(p.a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Connected components of the pair graph, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        let nn = inst.n * inst.n;
        if inst.ids.len() != inst.n || inst.data.len() != nn || inst.excluded.len() != nn {
            return Err(Error::Shape("QIP instance arrays do not match n".into()));
        }
        if inst.pairs.iter().any(|p| p.a >= inst.n || p.b >= inst.n || p.a == p.b) {
            return Err(Error::Shape("QIP pair index out of range".into()));
        }
        Ok(inst)
    }
}

/// Builds the program for a classified adjacency graph.
pub fn build_qip(graph: &PatternGraph, c: &QipConstants) -> Result<QipInstance> {
    let index: HashMap<usize, usize> = graph.nodes.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let mut inst = QipInstance::empty(graph.nodes.clone(), *c);
    let lookup = |id: usize| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::MalformedGraph(format!("edge references unknown primitive {id}")))
    };
    // exclusions are applied after all weights so later additions cannot
    // resurrect an excluded cell
    let mut exclusions = Vec::new();
    for e in &graph.edges {
        let (vi, vj) = (lookup(e.i)?, lookup(e.j)?);
        if vi == vj {
            return Err(Error::MalformedGraph(format!("self edge on primitive {}", e.i)));
        }
        let rto = || {
            e.ratio
                .ok_or_else(|| Error::MalformedGraph(format!("{} edge ({}, {}) lacks a ratio", e.pattern, e.i, e.j)))
        };
        let dist = (1.0 - e.distance / c.theta_adj).clamp(0.0, 1.0);
        match e.pattern {
            Pattern::P1 | Pattern::P2 | Pattern::P3 | Pattern::P4 => {
                inst.add_data(vi, vi, c.d0);
                exclusions.extend([(vi, vj), (vj, vi)]);
                inst.add_pair(vi, vj, -c.f1);
            }
            Pattern::P5 => {
                inst.add_data(vi, vi, c.d0 * rto()?);
                exclusions.extend([(vi, vj), (vj, vi)]);
                inst.add_pair(vi, vj, -c.f1);
            }
            Pattern::P6 | Pattern::P7 => {
                let r = rto()?;
                inst.add_data(vi, vj, c.d0 * r);
                inst.add_data(vj, vi, c.d0 * r);
                inst.add_pair(vi, vj, (c.w_d * dist + c.w_r * r) * c.f0);
            }
            Pattern::P8 => {
                let fr = f_transform(rto()?, c.delta);
                inst.add_data(vi, vj, c.d0 * fr);
                inst.add_data(vj, vi, c.d0 * fr);
                inst.add_pair(vi, vj, (c.w_d * dist + c.w_r * fr) * c.f0);
            }
        }
    }
    for (v, l) in exclusions {
        inst.exclude(v, l);
    }
    Ok(inst)
}

/// One label per vertex, indexed like the instance's vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelAssignment {
    pub labels: Vec<usize>,
}

impl LabelAssignment {
    pub fn identity(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
        }
    }

    /// `primitive id -> label`.
    pub fn by_primitive(&self, inst: &QipInstance) -> BTreeMap<usize, usize> {
        inst.ids.iter().copied().zip(self.labels.iter().copied()).collect()
    }

    pub fn to_json(&self, inst: &QipInstance) -> serde_json::Result<String> {
        let map: BTreeMap<String, usize> = self
            .by_primitive(inst)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        serde_json::to_string_pretty(&map)
    }

    pub fn from_json(text: &str, inst: &QipInstance) -> Result<Self> {
        let map: BTreeMap<String, usize> = serde_json::from_str(text)?;
        let mut labels = Vec::with_capacity(inst.n);
        for id in &inst.ids {
            let l = map
                .get(&id.to_string())
                .ok_or_else(|| Error::Shape(format!("assignment lacks primitive {id}")))?;
            labels.push(*l);
        }
        Ok(Self { labels })
    }
}

pub fn check_feasible(inst: &QipInstance, x: &LabelAssignment) -> Result<()> {
    if x.labels.len() != inst.n {
        return Err(Error::Infeasible(format!(
            "{} labels for {} vertices",
            x.labels.len(),
            inst.n
        )));
    }
    for (v, &l) in x.labels.iter().enumerate() {
        if l >= inst.n {
            return Err(Error::Infeasible(format!("vertex {v} holds label {l} >= {}", inst.n)));
        }
        if inst.is_excluded(v, l) {
            return Err(Error::Infeasible(format!("vertex {v} holds excluded label {l}")));
        }
    }
    Ok(())
}

/// Terms of the objective for `labels` restricted to `vertices`.
pub(crate) fn terms<'a>(
    inst: &'a QipInstance,
    labels: &'a [usize],
    vertices: impl Iterator<Item = usize> + 'a,
    pairs: impl Iterator<Item = &'a QipPair> + 'a,
) -> impl Iterator<Item = f64> + 'a {
    vertices
        .map(move |v| inst.data_at(v, labels[v]))
        .chain(pairs.filter(move |p| labels[p.a] == labels[p.b]).map(|p| p.weight))
}

/// Data weights of the chosen cells plus the weight of every pair sharing a
/// label, summed exactly and rounded once.
pub fn objective_value(inst: &QipInstance, x: &LabelAssignment) -> Result<f64> {
    check_feasible(inst, x)?;
    Ok(fsum::fsum(terms(inst, &x.labels, 0..inst.n, inst.pairs.iter())))
}

/// Plain floating-point objective for search inner loops.
pub(crate) fn objective_fast(inst: &QipInstance, labels: &[usize]) -> f64 {
    let data: f64 = (0..inst.n).map(|v| inst.data_at(v, labels[v])).sum();
    data + inst
        .pairs
        .iter()
        .filter(|p| labels[p.a] == labels[p.b])
        .map(|p| p.weight)
        .sum::<f64>()
}

/// Solves with the exact solver when every component fits under `cap`,
/// otherwise with the heuristic.
pub fn solve_auto(inst: &QipInstance, cap: usize, seed: u64) -> Result<LabelAssignment> {
    if inst.components().iter().all(|c| c.len() <= cap) {
        solve_exact(inst, cap)
    } else {
        Ok(solve_heuristic(inst, seed))
    }
}
