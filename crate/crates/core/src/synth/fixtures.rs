//! Noise-free primitive pairs realizing each of the eight patterns.

use nalgebra::Point3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{GravityPrior, PlanePrimitive};
use crate::patterns::{Pattern, PatternEdge};

/// Horizontal tolerance used to build fixture primitives (degrees).
pub const FIXTURE_HORIZONTAL_DEG: f64 = 10.0;

fn pt(x: f64, y: f64, z: f64) -> Point3<f64> {
    Point3::new(x, y, z)
}

/// Upright rectangle in the plane `y = y0`.
fn wall_y(y0: f64, x0: f64, x1: f64, z0: f64, z1: f64) -> Vec<Point3<f64>> {
    vec![pt(x0, y0, z0), pt(x1, y0, z0), pt(x1, y0, z1), pt(x0, y0, z1)]
}

fn unit_table() -> Vec<Point3<f64>> {
    vec![
        pt(0.0, 0.0, 0.0),
        pt(1.0, 0.0, 0.0),
        pt(1.0, 1.0, 0.0),
        pt(0.0, 1.0, 0.0),
    ]
}

/// Polygons of the two primitives of fixture `k` (first is the horizontal
/// one for P1-P7) with the expected ratio and distance.
fn fixture_polygons(k: u8) -> Option<(Vec<Point3<f64>>, Vec<Point3<f64>>, Option<f64>, f64)> {
    Some(match k {
        // upright square standing on one corner
        1 => (
            unit_table(),
            vec![
                pt(0.5, 0.5, 0.0),
                pt(0.6, 0.5, 0.1),
                pt(0.5, 0.5, 0.2),
                pt(0.4, 0.5, 0.1),
            ],
            None,
            0.0,
        ),
        2 => (unit_table(), wall_y(0.5, 0.3, 0.7, 0.0, 0.4), None, 0.0),
        3 => (unit_table(), wall_y(0.5, 0.8, 1.2, 0.0, 0.4), None, 0.0),
        4 => (unit_table(), wall_y(0.5, -0.2, 1.2, 0.0, 0.4), None, 0.0),
        // side face hanging from the top's front edge, shifted half a width
        5 => (unit_table(), wall_y(0.0, 0.5, 1.5, -0.3, 0.0), Some(0.5), 0.0),
        6 => (unit_table(), wall_y(0.0, 0.0, 1.0, -0.3, 0.0), Some(1.0), 0.0),
        // panel under a shelf with a 1 cm gap
        7 => (unit_table(), wall_y(0.5, 0.3, 0.7, -0.41, -0.01), Some(0.4), 0.01),
        8 => (
            vec![
                pt(0.0, 0.0, 0.0),
                pt(0.0, 0.5, 0.0),
                pt(0.0, 0.5, 0.4),
                pt(0.0, 0.0, 0.4),
            ],
            wall_y(0.0, 0.0, 0.5, 0.0, 0.4),
            Some(1.0),
            0.0,
        ),
        _ => return None,
    })
}

/// Exact primitive pair realizing pattern `k` (1..=8), ids 0 and 1, with the
/// classification it must receive.
pub fn canonical_pattern_fixture(k: u8) -> Result<(PlanePrimitive, PlanePrimitive, PatternEdge)> {
    perturbed_pattern_fixture(k, 0.0, 0)
}

/// Fixture `k` with independent Gaussian noise of std `sigma` added to every
/// polygon vertex. The expected edge is the noise-free one.
pub fn perturbed_pattern_fixture(
    k: u8,
    sigma: f64,
    seed: u64,
) -> Result<(PlanePrimitive, PlanePrimitive, PatternEdge)> {
    let pattern =
        Pattern::from_number(k).ok_or_else(|| Error::Precondition(format!("pattern number {k} outside 1..=8")))?;
    let (mut a, mut b, ratio, distance) = fixture_polygons(k).expect("pattern number checked");
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).map_err(|e| Error::Precondition(e.to_string()))?;
        for p in a.iter_mut().chain(b.iter_mut()) {
            p.x += noise.sample(&mut rng);
            p.y += noise.sample(&mut rng);
            p.z += noise.sample(&mut rng);
        }
    }
    let gravity = GravityPrior::z_up();
    let pa = PlanePrimitive::from_polygon(0, &a, &gravity, FIXTURE_HORIZONTAL_DEG)?;
    let pb = PlanePrimitive::from_polygon(1, &b, &gravity, FIXTURE_HORIZONTAL_DEG)?;
    let expected = PatternEdge {
        i: 0,
        j: 1,
        pattern,
        connection: pattern.connection(),
        ratio,
        distance,
    };
    Ok((pa, pb, expected))
}
