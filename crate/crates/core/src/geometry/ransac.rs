//! Iterative "fit and remove" plane extraction.
//!
//! Each round draws `max_iterations` candidate planes from point triples
//! sampled inside one grid cell of the remaining points, scores them on a
//! fixed stride subsample, refits the winner by least squares and keeps its
//! largest Euclidean-connected inlier component as the next primitive. When
//! per-point normals are available, inliers must also agree in orientation
//! with the plane, which keeps thin slivers of perpendicular surfaces out of
//! the hull.
//!
//! Candidates are generated sequentially from one seeded stream and scored in
//! parallel; the winner is the highest count with ties going to the lowest
//! iteration index, so the result equals a sequential run.

use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::{GravityPrior, PointCloud};
use super::grid::{euclidean_components, SpatialGrid};
use super::plane::{fit_plane, PlanePrimitive};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    /// Inlier band half-width, meters.
    pub distance_threshold: f64,
    pub max_iterations: usize,
    /// Absolute floor on primitive size.
    pub min_inliers: usize,
    /// Relative floor on primitive size, as a fraction of the remaining points.
    pub min_inlier_fraction: f64,
    pub seed: u64,
    /// Angle to gravity below which a plane counts as horizontal, degrees.
    pub horizontal_tolerance_deg: f64,
    /// Neighborhood radius for per-point normal estimation; 0 disables the
    /// orientation check.
    pub normal_radius: f64,
    pub normal_tolerance_deg: f64,
    /// Neighbor distance used to split a plane's inliers into components.
    pub cluster_tolerance: f64,
    /// Grid cell size from which candidate triples are drawn.
    pub sample_cell: f64,
    /// Candidates are scored on at most this many points.
    pub score_sample: usize,
    /// Consecutive rounds without an acceptable primitive before stopping.
    pub max_failures: usize,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            distance_threshold: 0.005,
            max_iterations: 1000,
            min_inliers: 200,
            min_inlier_fraction: 0.005,
            seed: 0,
            horizontal_tolerance_deg: 10.0,
            normal_radius: 0.006,
            normal_tolerance_deg: 25.0,
            cluster_tolerance: 0.015,
            sample_cell: 0.05,
            score_sample: 4000,
            max_failures: 3,
        }
    }
}

impl RansacParams {
    pub fn min_inliers_for(&self, remaining: usize) -> usize {
        self.min_inliers
            .max((self.min_inlier_fraction * remaining as f64).ceil() as usize)
    }
}

/// Unoriented unit normals from local PCA; `None` where fewer than five
/// neighbors exist or the neighborhood is not planar.
pub fn estimate_normals(points: &[Point3<f64>], radius: f64) -> Vec<Option<Vector3<f64>>> {
    let grid = SpatialGrid::new(points, 0..points.len() as u32, radius);
    points
        .par_iter()
        .map(|p| {
            let mut count = 0usize;
            let mut sum = Vector3::zeros();
            let mut outer = Matrix3::zeros();
            grid.for_each_within(p, radius, |j| {
                let q = points[j as usize].coords - p.coords;
                count += 1;
                sum += q;
                outer += q * q.transpose();
            });
            if count < 5 {
                return None;
            }
            let n = count as f64;
            let mean = sum / n;
            let cov = outer / n - mean * mean.transpose();
            let eig = SymmetricEigen::new(cov);
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            if eig.eigenvalues[order[1]] <= 1e-12 * eig.eigenvalues[order[2]].max(1e-300) {
                return None;
            }
            Some(eig.eigenvectors.column(order[0]).into_owned().normalize())
        })
        .collect()
}

struct Candidate {
    normal: Vector3<f64>,
    offset: f64,
}

fn plane_through(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Option<Candidate> {
    let n = (b - a).cross(&(c - a));
    let scale = (b - a).norm() * (c - a).norm();
    if !(scale > 0.0) || n.norm() <= 1e-9 * scale {
        return None;
    }
    let normal = n.normalize();
    Some(Candidate {
        normal,
        offset: -normal.dot(&a.coords),
    })
}

struct Inlier<'a> {
    points: &'a [Point3<f64>],
    normals: &'a [Option<Vector3<f64>>],
    threshold: f64,
    min_cos: f64,
}

impl Inlier<'_> {
    fn accepts(&self, normal: &Vector3<f64>, offset: f64, i: u32) -> bool {
        let i = i as usize;
        (normal.dot(&self.points[i].coords) + offset).abs() <= self.threshold
            && self
                .normals
                .get(i)
                .copied()
                .flatten()
                .is_none_or(|n| n.dot(normal).abs() >= self.min_cos)
    }
}

/// Extracts planar primitives until no acceptable plane remains.
pub fn fit_planes_ransac(
    cloud: &PointCloud,
    gravity: &GravityPrior,
    params: &RansacParams,
) -> Result<Vec<PlanePrimitive>> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("point cloud has no points"));
    }
    cloud.validate()?;
    let points = &cloud.points;
    let normals = if params.normal_radius > 0.0 {
        estimate_normals(points, params.normal_radius)
    } else {
        Vec::new()
    };
    let test = Inlier {
        points,
        normals: &normals,
        threshold: params.distance_threshold,
        min_cos: params.normal_tolerance_deg.to_radians().cos(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut remaining: Vec<u32> = (0..points.len() as u32).collect();
    let mut taken = vec![false; points.len()];
    let mut found: Vec<PlanePrimitive> = Vec::new();
    let mut failures = 0usize;

    while failures < params.max_failures {
        let min_in = params.min_inliers_for(remaining.len());
        if remaining.len() < min_in.max(3) {
            break;
        }

        let grid = SpatialGrid::new(points, remaining.iter().copied(), params.sample_cell);
        let candidates: Vec<Option<Candidate>> = (0..params.max_iterations)
            .map(|_| {
                let seed = remaining[rng.random_range(0..remaining.len())];
                let cell = grid.cell_of(&points[seed as usize]);
                if cell.len() < 3 {
                    return None;
                }
                let b = cell[rng.random_range(0..cell.len())];
                let c = cell[rng.random_range(0..cell.len())];
                plane_through(&points[seed as usize], &points[b as usize], &points[c as usize])
            })
            .collect();

        let stride = remaining.len().div_ceil(params.score_sample.max(1));
        let sample: Vec<u32> = remaining.iter().copied().step_by(stride.max(1)).collect();
        let best = candidates
            .par_iter()
            .enumerate()
            .filter_map(|(it, c)| {
                c.as_ref().map(|c| {
                    let score = sample.iter().filter(|&&i| test.accepts(&c.normal, c.offset, i)).count();
                    (score, it)
                })
            })
            .reduce_with(|a, b| if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b });
        let Some((_, best_it)) = best else {
            // no non-degenerate triple anywhere: nothing planar left
            break;
        };
        let cand = candidates[best_it].as_ref().expect("scored candidate exists");

        let component = match refine(&test, &remaining, cand, params) {
            Some(c) if c.len() >= min_in => c,
            _ => {
                failures += 1;
                continue;
            }
        };

        let members: Vec<Point3<f64>> = component.iter().map(|&i| points[i as usize]).collect();
        let Some((normal, offset, _)) = fit_plane(&members) else {
            failures += 1;
            continue;
        };
        // final inliers must sit inside the band of the final plane
        let inliers: Vec<usize> = component
            .iter()
            .filter(|&&i| test.accepts(&normal, offset, i))
            .map(|&i| i as usize)
            .collect();
        if inliers.len() < min_in {
            failures += 1;
            continue;
        }
        let support: Vec<Point3<f64>> = inliers.iter().map(|&i| points[i]).collect();
        let prim = match PlanePrimitive::from_plane(
            0,
            normal,
            offset,
            inliers,
            &support,
            gravity,
            params.horizontal_tolerance_deg,
        ) {
            Ok(p) => p,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        for &i in &prim.inliers {
            taken[i] = true;
        }
        remaining.retain(|&i| !taken[i as usize]);
        failures = 0;
        log::debug!(
            "plane {} with {} inliers, {} points left",
            found.len(),
            prim.inliers.len(),
            remaining.len()
        );
        found.push(prim);
    }

    found.sort_by(|a, b| {
        b.inliers
            .len()
            .cmp(&a.inliers.len())
            .then(a.inliers[0].cmp(&b.inliers[0]))
    });
    for (id, p) in found.iter_mut().enumerate() {
        p.id = id;
    }
    Ok(found)
}

/// Full inlier set of a candidate, least-squares refit, then the largest
/// connected component of the refit plane's inliers.
fn refine(test: &Inlier<'_>, remaining: &[u32], cand: &Candidate, params: &RansacParams) -> Option<Vec<u32>> {
    let first: Vec<u32> = remaining
        .iter()
        .copied()
        .filter(|&i| test.accepts(&cand.normal, cand.offset, i))
        .collect();
    let comps = euclidean_components(test.points, &first, params.cluster_tolerance);
    let seed_comp = comps.into_iter().next()?;
    let pts: Vec<Point3<f64>> = seed_comp.iter().map(|&i| test.points[i as usize]).collect();
    let (normal, offset, _) = fit_plane(&pts)?;
    let second: Vec<u32> = remaining
        .iter()
        .copied()
        .filter(|&i| test.accepts(&normal, offset, i))
        .collect();
    euclidean_components(test.points, &second, params.cluster_tolerance)
        .into_iter()
        .next()
}
