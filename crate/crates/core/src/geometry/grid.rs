use std::collections::HashMap;

use nalgebra::Point3;

/// Uniform hash grid over a subset of a point array.
pub(crate) struct SpatialGrid<'a> {
    points: &'a [Point3<f64>],
    cell: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> SpatialGrid<'a> {
    pub fn new(points: &'a [Point3<f64>], subset: impl IntoIterator<Item = u32>, cell: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for i in subset {
            cells.entry(key(&points[i as usize], cell)).or_default().push(i);
        }
        Self { points, cell, cells }
    }

    pub fn cell_of(&self, p: &Point3<f64>) -> &[u32] {
        self.cells.get(&key(p, self.cell)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Calls `f` for every indexed point within `radius` of `p`. Visit order
    /// is deterministic.
    pub fn for_each_within(&self, p: &Point3<f64>, radius: f64, mut f: impl FnMut(u32)) {
        let reach = (radius / self.cell).ceil() as i64;
        let k = key(p, self.cell);
        let r2 = radius * radius;
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(bucket) = self.cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &j in bucket {
                            if (self.points[j as usize] - p).norm_squared() <= r2 {
                                f(j);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn key(p: &Point3<f64>, cell: f64) -> [i64; 3] {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}

/// Connected components of `subset` under the `radius` neighbor relation.
/// Components come back largest first; ties go to the one holding the
/// smallest index. Members are sorted.
pub(crate) fn euclidean_components(points: &[Point3<f64>], subset: &[u32], radius: f64) -> Vec<Vec<u32>> {
    let grid = SpatialGrid::new(points, subset.iter().copied(), radius);
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    let mut visited = vec![false; points.len()];
    let mut comps = Vec::new();
    for &s in &sorted {
        if visited[s as usize] {
            continue;
        }
        visited[s as usize] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let cur = comp[head];
            head += 1;
            grid.for_each_within(&points[cur as usize], radius, |j| {
                if !visited[j as usize] {
                    visited[j as usize] = true;
                    comp.push(j);
                }
            });
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_clusters() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(Point3::new(i as f64 * 0.01, 0.0, 0.0));
        }
        for i in 0..5 {
            pts.push(Point3::new(1.0 + i as f64 * 0.01, 0.0, 0.0));
        }
        let subset: Vec<u32> = (0..15).collect();
        let comps = euclidean_components(&pts, &subset, 0.015);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], (0..10).collect::<Vec<_>>());
        assert_eq!(comps[1], (10..15).collect::<Vec<_>>());
    }
}
