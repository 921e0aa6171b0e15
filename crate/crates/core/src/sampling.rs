//! Deterministic sample plans in the open unit disc and on the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Radii of the interior sampling grid.
pub const DISC_RADII: [f64; 3] = [0.3, 0.6, 0.9];

fn offsets(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random::<f64>()).collect()
}

/// Interior points on `per_radius` rotated roots of unity at each grid radius.
pub fn disc_grid(per_radius: usize, seed: u64) -> Vec<Complex64> {
    let per = per_radius.max(1);
    let offs = offsets(seed, DISC_RADII.len());
    let mut out = Vec::with_capacity(per * DISC_RADII.len());
    for k in 0..per {
        for (r, off) in DISC_RADII.iter().zip(&offs) {
            let theta = 2.0 * PI * (off + k as f64) / per as f64;
            out.push(Complex64::from_polar(*r, theta));
        }
    }
    out
}

/// Nested interior grids: level `l` holds `base << l` points per radius and
/// contains every point of the levels below it.
pub fn nested_disc_levels(base: usize, levels: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let offs = offsets(seed, DISC_RADII.len());
    let coarse = base.max(1);
    (0..levels)
        .map(|l| {
            let per = coarse << l;
            let mut pts = Vec::with_capacity(per * DISC_RADII.len());
            for k in 0..per {
                for (r, off) in DISC_RADII.iter().zip(&offs) {
                    let theta = 2.0 * PI * (off / coarse as f64 + k as f64 / per as f64);
                    pts.push(Complex64::from_polar(*r, theta));
                }
            }
            pts
        })
        .collect()
}

/// Exactly `count` interior points drawn from the radial grid.
pub fn disc_points(count: usize, seed: u64) -> Vec<Complex64> {
    let per = count.div_ceil(DISC_RADII.len());
    let mut pts = disc_grid(per, seed);
    pts.truncate(count);
    pts
}

/// `count` rotated roots of unity, returned as (angle, point) pairs.
pub fn boundary_points(count: usize, seed: u64) -> Vec<(f64, Complex64)> {
    let off = offsets(seed ^ 0x9e37_79b9_7f4a_7c15, 1)[0];
    (0..count)
        .map(|k| {
            let theta = 2.0 * PI * (off + k as f64) / count as f64;
            (theta, Complex64::from_polar(1.0, theta))
        })
        .collect()
}

/// Drops points closer than `margin` to any pole.
pub fn exclude_near(points: Vec<Complex64>, poles: &[Complex64], margin: f64) -> Vec<Complex64> {
    points
        .into_iter()
        .filter(|z| poles.iter().all(|p| (z - p).norm() > margin))
        .collect()
}
