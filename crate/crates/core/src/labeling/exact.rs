use rayon::prelude::*;

use super::fsum::fsum;
use super::{LabelAssignment, QipInstance};
use crate::error::{Error, Result};

pub const DEFAULT_EXACT_CAP: usize = 14;

/// Global maximizer of the objective, by branch and bound per connected
/// component of the pair graph.
///
/// Inside a component only the labels owned by its vertices carry data or
/// exclusions; every other label behaves identically there, so those are
/// searched as interchangeable "fresh" slots and realized afterwards as the
/// smallest labels still unused. Exact ties go to the lexicographically
/// smallest label vector of the component (fresh slots ordered after all
/// owned labels).
pub fn solve_exact(inst: &QipInstance, cap: usize) -> Result<LabelAssignment> {
    let comps = inst.components();
    if let Some(c) = comps.iter().find(|c| c.len() > cap) {
        return Err(Error::Capacity { size: c.len(), cap });
    }
    let solutions: Vec<Vec<usize>> = comps.par_iter().map(|c| solve_component(inst, c)).collect();
    Ok(realize(inst, &comps, &solutions))
}

/// Choice codes: `< n` is an owned label, `n + s` is fresh slot `s`.
fn realize(inst: &QipInstance, comps: &[Vec<usize>], solutions: &[Vec<usize>]) -> LabelAssignment {
    let n = inst.n;
    let mut labels = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (comp, sol) in comps.iter().zip(solutions) {
        for (&v, &code) in comp.iter().zip(sol) {
            if code < n {
                labels[v] = code;
                used[code] = true;
            }
        }
    }
    for (comp, sol) in comps.iter().zip(solutions) {
        let mut own = vec![false; n];
        for &v in comp {
            own[v] = true;
        }
        let mut local = vec![false; n];
        for &code in sol.iter().filter(|&&c| c < n) {
            local[code] = true;
        }
        let slots = sol.iter().filter(|&&c| c >= n).map(|&c| c - n + 1).max().unwrap_or(0);
        let mut slot_label = Vec::with_capacity(slots);
        for _ in 0..slots {
            let l = (0..n)
                .find(|&l| !own[l] && !used[l])
                .or_else(|| (0..n).find(|&l| !own[l] && !local[l]))
                .expect("fresh slots never outnumber foreign labels");
            used[l] = true;
            local[l] = true;
            slot_label.push(l);
        }
        for (&v, &code) in comp.iter().zip(sol) {
            if code >= n {
                labels[v] = slot_label[code - n];
            }
        }
    }
    LabelAssignment { labels }
}

struct Search<'a> {
    inst: &'a QipInstance,
    comp: &'a [usize],
    /// Per position: (choice code, data weight) candidates.
    choices: Vec<Vec<(usize, f64)>>,
    /// Per position: (earlier position, weight) pairs.
    back_pairs: Vec<Vec<(usize, f64)>>,
    /// Upper bound on what positions `k..` can still add.
    tail_bound: Vec<f64>,
    slack: f64,
    current: Vec<usize>,
    best: Vec<usize>,
    best_score: f64,
    have_best: bool,
}

fn solve_component(inst: &QipInstance, comp: &[usize]) -> Vec<usize> {
    let n = inst.n;
    let m = comp.len();
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in comp.iter().enumerate() {
        pos[v] = k;
    }
    let fresh_cap = m.min(n - m);

    let mut choices = Vec::with_capacity(m);
    let mut scale = 0.0;
    for &v in comp {
        let mut list: Vec<(usize, f64)> = comp
            .iter()
            .filter(|&&l| !inst.is_excluded(v, l))
            .map(|&l| (l, inst.data_at(v, l)))
            .collect();
        scale += list.iter().map(|c| c.1.abs()).sum::<f64>();
        list.extend((0..fresh_cap).map(|s| (n + s, 0.0)));
        choices.push(list);
    }
    let mut back_pairs = vec![Vec::new(); m];
    let mut pair_tail = vec![0.0; m + 1];
    for p in &inst.pairs {
        if pos[p.a] == usize::MAX {
            continue;
        }
        let (x, y) = (pos[p.a].min(pos[p.b]), pos[p.a].max(pos[p.b]));
        back_pairs[y].push((x, p.weight));
        pair_tail[y] += p.weight.max(0.0);
        scale += p.weight.abs();
    }
    let mut tail_bound = vec![0.0; m + 1];
    for k in (0..m).rev() {
        let best_data = choices[k].iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        tail_bound[k] = tail_bound[k + 1] + best_data.max(0.0) + pair_tail[k];
    }

    let mut s = Search {
        inst,
        comp,
        choices,
        back_pairs,
        tail_bound,
        slack: 1e-9 * (1.0 + scale),
        current: vec![0; m],
        best: Vec::new(),
        best_score: f64::NEG_INFINITY,
        have_best: false,
    };
    s.descend(0, 0.0, 0);
    s.best
}

impl Search<'_> {
    fn descend(&mut self, k: usize, score: f64, slots: usize) {
        if self.have_best && score + self.tail_bound[k] < self.best_score - self.slack {
            return;
        }
        if k == self.comp.len() {
            self.offer(score);
            return;
        }
        let n = self.inst.n;
        for c in 0..self.choices[k].len() {
            let (code, w) = self.choices[k][c];
            if code >= n && code - n > slots {
                break;
            }
            self.current[k] = code;
            let mut gain = w;
            for &(x, pw) in &self.back_pairs[k] {
                if self.current[x] == code {
                    gain += pw;
                }
            }
            let next_slots = if code >= n && code - n == slots {
                slots + 1
            } else {
                slots
            };
            self.descend(k + 1, score + gain, next_slots);
        }
    }

    fn offer(&mut self, score: f64) {
        if !self.have_best {
            self.take(score);
            return;
        }
        let diff = fsum(
            self.terms(&self.current)
                .chain(self.terms(&self.best).map(|t| -t))
                .collect::<Vec<_>>(),
        );
        if diff > 0.0 || (diff == 0.0 && self.current < self.best) {
            self.take(score);
        }
    }

    fn take(&mut self, score: f64) {
        self.best.clone_from(&self.current);
        self.best_score = score;
        self.have_best = true;
    }

    fn terms<'b>(&'b self, codes: &'b [usize]) -> impl Iterator<Item = f64> + 'b {
        let n = self.inst.n;
        let data = self.comp.iter().zip(codes).map(
            move |(&v, &code)| {
                if code < n {
                    self.inst.data_at(v, code)
                } else {
                    0.0
                }
            },
        );
        let pairs = self.back_pairs.iter().enumerate().flat_map(move |(y, list)| {
            list.iter()
                .filter(move |&&(x, _)| codes[x] == codes[y])
                .map(|&(_, w)| w)
        });
        data.chain(pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::random::{brute_force_max, random_instance};
    use crate::labeling::{build_qip, objective_value, QipConstants};
    use crate::patterns::{Pattern, PatternEdge, PatternGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(edges: &[(usize, usize, Pattern, Option<f64>)], n: usize) -> QipInstance {
        let g = PatternGraph {
            nodes: (0..n).collect(),
            edges: edges
                .iter()
                .map(|&(i, j, pattern, ratio)| PatternEdge {
                    i,
                    j,
                    pattern,
                    connection: pattern.connection(),
                    ratio,
                    distance: 0.0,
                })
                .collect(),
        };
        build_qip(&g, &QipConstants::default()).unwrap()
    }

    #[test]
    fn support_pair_is_split() {
        let inst = graph(&[(0, 1, Pattern::P2, None)], 2);
        let x = solve_exact(&inst, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(x.labels, vec![0, 1]);
        assert_eq!(objective_value(&inst, &x).unwrap(), 1.0);
    }

    #[test]
    fn watertight_pair_is_merged() {
        let inst = graph(&[(0, 1, Pattern::P6, Some(0.9))], 2);
        let x = solve_exact(&inst, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(x.labels[0], x.labels[1]);
        assert!((objective_value(&inst, &x).unwrap() - 1.83).abs() < 1e-12);
    }

    #[test]
    fn triangle_keeps_supporter_apart() {
        let inst = graph(
            &[
                (0, 1, Pattern::P2, None),
                (1, 2, Pattern::P6, Some(1.0)),
                (0, 2, Pattern::P8, Some(0.5)),
            ],
            3,
        );
        let x = solve_exact(&inst, DEFAULT_EXACT_CAP).unwrap();
        assert_ne!(x.labels[0], x.labels[1]);
        assert_eq!(objective_value(&inst, &x).unwrap(), brute_force_max(&inst));
        // the inner pair (0, 2) outscores the watertight pair once the
        // supporter's self term is counted
        assert_eq!(x.labels[0], x.labels[2]);
        assert!((brute_force_max(&inst) - 3.15).abs() < 1e-12);
    }

    #[test]
    fn capacity_error() {
        let edges: Vec<_> = (0..15).map(|k| (k, k + 1, Pattern::P8, Some(1.0))).collect();
        let inst = graph(&edges, 16);
        assert!(matches!(
            solve_exact(&inst, DEFAULT_EXACT_CAP),
            Err(Error::Capacity { size: 16, cap: 14 })
        ));
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let inst = random_instance(&mut rng, 6);
            let x = solve_exact(&inst, DEFAULT_EXACT_CAP).unwrap();
            assert_eq!(objective_value(&inst, &x).unwrap(), brute_force_max(&inst));
        }
    }

    #[test]
    fn support_edges_always_separated() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let inst = random_instance(&mut rng, 8);
            let x = solve_exact(&inst, DEFAULT_EXACT_CAP).unwrap();
            for p in inst.pairs.iter().filter(|p| p.weight <= -inst.constants.f1 * 0.5) {
                assert_ne!(x.labels[p.a], x.labels[p.b]);
            }
        }
    }

    #[test]
    fn beats_random_feasible_assignments() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 8);
            let best = objective_value(&inst, &solve_exact(&inst, DEFAULT_EXACT_CAP).unwrap()).unwrap();
            let mut tried = 0;
            while tried < 1000 {
                let labels: Vec<usize> = (0..inst.n).map(|_| rng.random_range(0..inst.n)).collect();
                let x = LabelAssignment { labels };
                if let Ok(v) = objective_value(&inst, &x) {
                    assert!(v <= best);
                    tried += 1;
                }
            }
        }
    }
}
