//! Normalized Laplacian spectrum, Cheeger bounds and the two graph
//! similarity scores.

use nalgebra::DMatrix;

use super::graph::GraphMatrix;
use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at which Jacobi iteration stops.
pub const JACOBI_TOL: f64 = 1e-10;
/// Eigenvalues closer than this to the second smallest one span its
/// eigenspace.
pub const MULTIPLICITY_GAP: f64 = 1e-8;

/// `D^{-1/2} (D - A) D^{-1/2}`.
pub fn normalized_laplacian(g: &GraphMatrix) -> Result<DMatrix<f64>> {
    let d: Vec<f64> = (0..g.n).map(|v| g.degree(v) as f64).collect();
    if let Some(v) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::Precondition(format!("node {v} is isolated")));
    }
    Ok(DMatrix::from_fn(g.n, g.n, |i, j| {
        if i == j {
            1.0
        } else if g.adj[i][j] == 1 {
            -1.0 / (d[i] * d[j]).sqrt()
        } else {
            0.0
        }
    }))
}

fn off_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with eigenvectors as matching columns.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Shape(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut sweeps = 0;
    while off_norm(&a) > JACOBI_TOL && sweeps < 100 {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Second smallest eigenvalue and a unit eigenvector whose first nonzero
/// component is positive.
pub fn fiedler_pair(l: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    if l.nrows() < 2 {
        return Err(Error::Precondition("Fiedler pair needs at least two nodes".into()));
    }
    let (values, vectors) = jacobi_eigen(l)?;
    let mut u: Vec<f64> = vectors.column(1).iter().copied().collect();
    if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok((values[1], u))
}

/// `(λ1 / 2, sqrt(2 λ1))`.
pub fn cheeger_bounds(lambda1: f64) -> (f64, f64) {
    (lambda1 * 0.5, (2.0 * lambda1).sqrt())
}

/// Cheeger constant by enumerating every vertex subset.
pub fn cheeger_constant(g: &GraphMatrix) -> Result<f64> {
    if g.n > 24 {
        return Err(Error::Precondition(format!("{} nodes is too many to enumerate", g.n)));
    }
    let deg: Vec<usize> = (0..g.n).map(|v| g.degree(v)).collect();
    let total: usize = deg.iter().sum();
    let mut best = f64::INFINITY;
    for s in 1u32..(1 << g.n) - 1 {
        let inside = |v: usize| s >> v & 1 == 1;
        let vol: usize = (0..g.n).filter(|&v| inside(v)).map(|v| deg[v]).sum();
        let mut cut = 0;
        for a in 0..g.n {
            for b in 0..g.n {
                if inside(a) && !inside(b) && g.adj[a][b] == 1 {
                    cut += 1;
                }
            }
        }
        let den = vol.min(total - vol);
        if den > 0 {
            best = best.min(cut as f64 / den as f64);
        }
    }
    Ok(best)
}

fn lambda1(g: &GraphMatrix) -> Result<f64> {
    Ok(fiedler_pair(&normalized_laplacian(g)?)?.0)
}

/// `|(u_gs - l_gs) - (u_gt - l_gt)|` from the Cheeger bounds of both graphs.
pub fn cheeger_section(gs: &GraphMatrix, gt: &GraphMatrix) -> Result<f64> {
    let (l1, u1) = cheeger_bounds(lambda1(gs)?);
    let (l2, u2) = cheeger_bounds(lambda1(gt)?);
    Ok(((u1 - l1) - (u2 - l2)).abs())
}

/// Orthogonal projector onto the eigenspace of the second smallest
/// eigenvalue, padded with zeros to `size`.
fn fiedler_projector(g: &GraphMatrix, size: usize) -> Result<DMatrix<f64>> {
    let l = normalized_laplacian(g)?;
    if g.n < 2 {
        return Err(Error::Precondition("Fiedler pair needs at least two nodes".into()));
    }
    let (values, vectors) = jacobi_eigen(&l)?;
    let mut p = DMatrix::zeros(size, size);
    for k in (0..g.n).filter(|&k| (values[k] - values[1]).abs() < MULTIPLICITY_GAP) {
        let u = vectors.column(k);
        for i in 0..g.n {
            for j in 0..g.n {
                p[(i, j)] += u[i] * u[j];
            }
        }
    }
    Ok(p)
}

/// `‖P_gs − P_gt‖_F / sqrt(|V_gt|)` where `P` projects onto the Fiedler
/// eigenspace (`u1 u1ᵀ` when λ1 is simple). Nodes are assumed aligned by
/// index; the smaller graph is padded with zeros.
pub fn spectral_section(gs: &GraphMatrix, gt: &GraphMatrix) -> Result<f64> {
    if gt.n == 0 {
        return Err(Error::Precondition("empty ground-truth graph".into()));
    }
    let size = gs.n.max(gt.n);
    let d = fiedler_projector(gs, size)? - fiedler_projector(gt, size)?;
    Ok(d.norm() / (gt.n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> GraphMatrix {
        let mut g = GraphMatrix::new(n);
        for v in 1..n {
            let u = rng.random_range(0..v);
            g.connect(u, v);
        }
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.25) {
                    g.connect(a, b);
                }
            }
        }
        g
    }

    #[test]
    fn single_edge() {
        let g = GraphMatrix::from_edges(2, &[(0, 1)]);
        let l = normalized_laplacian(&g).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let (lam, u) = fiedler_pair(&l).unwrap();
        assert!((lam - 2.0).abs() < 1e-12);
        assert!(u[0] > 0.0);
        assert_eq!(cheeger_bounds(2.0), (1.0, 2.0));
    }

    #[test]
    fn triangle() {
        let g = GraphMatrix::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let l = normalized_laplacian(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { -0.5 };
                assert!((l[(i, j)] - want).abs() < 1e-15);
            }
        }
        let (lam, u) = fiedler_pair(&l).unwrap();
        assert!((lam - 1.5).abs() < 1e-12);
        let r = &l * DMatrix::from_column_slice(3, 1, &u) - DMatrix::from_column_slice(3, 1, &u) * lam;
        assert!(r.norm() < 1e-8);
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(cheeger_bounds(0.5), (0.25, 1.0));
    }

    #[test]
    fn edge_versus_triangle_section() {
        let e = GraphMatrix::from_edges(2, &[(0, 1)]);
        let t = GraphMatrix::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let want = ((2.0 - 1.0) - (3.0f64.sqrt() - 0.75)).abs();
        assert!((cheeger_section(&e, &t).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn isolated_node_rejected() {
        let g = GraphMatrix::from_edges(3, &[(0, 1)]);
        assert!(matches!(normalized_laplacian(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn asymmetric_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(jacobi_eigen(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn jacobi_agrees_with_library_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..12 {
            let g = random_connected(&mut rng, n);
            let l = normalized_laplacian(&g).unwrap();
            let (vals, vecs) = jacobi_eigen(&l).unwrap();
            let mut want: Vec<f64> = SymmetricEigen::new(l.clone()).eigenvalues.iter().copied().collect();
            want.sort_by(f64::total_cmp);
            for (a, b) in vals.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!(vals[0].abs() < 1e-9);
            assert!(vals.iter().all(|&x| x > -1e-9 && x < 2.0 + 1e-9));
            for k in 0..n {
                let u = vecs.column(k);
                assert!((&l * u - u * vals[k]).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn random_eight_node_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_connected(&mut rng, 8);
        let l = normalized_laplacian(&g).unwrap();
        let (lam, u) = fiedler_pair(&l).unwrap();
        let u = DMatrix::from_column_slice(8, 1, &u);
        assert!((&l * &u - &u * lam).norm() <= 1e-8);
        assert!((u.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sections_vanish_on_identical_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..10 {
            let g = random_connected(&mut rng, n);
            assert!(cheeger_section(&g, &g).unwrap() <= 1e-9);
            assert!(spectral_section(&g, &g).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn sections_invariant_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let n = rng.random_range(3..9);
            let a = random_connected(&mut rng, n);
            let b = random_connected(&mut rng, n);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let relabel = |g: &GraphMatrix| {
                let mut h = GraphMatrix::new(n);
                for i in 0..n {
                    for j in 0..n {
                        if g.adj[i][j] == 1 {
                            h.connect(perm[i], perm[j]);
                        }
                    }
                }
                h
            };
            let s1 = spectral_section(&a, &b).unwrap();
            let s2 = spectral_section(&relabel(&a), &relabel(&b)).unwrap();
            assert!((s1 - s2).abs() < 1e-9);
            let c1 = cheeger_section(&a, &b).unwrap();
            let c2 = cheeger_section(&relabel(&a), &relabel(&b)).unwrap();
            assert!((c1 - c2).abs() < 1e-9);
        }
    }

    #[test]
    fn cheeger_inequality_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..30 {
            let n = rng.random_range(2..=8);
            let g = random_connected(&mut rng, n);
            let h = cheeger_constant(&g).unwrap();
            let (l, u) = cheeger_bounds(lambda1(&g).unwrap());
            assert!(l <= h + 1e-12 && h < u, "n {n}: {l} <= {h} < {u}");
        }
    }
}
