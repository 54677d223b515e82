//! Seeded sampling shared by the estimators. All generators are ChaCha8
//! streams derived from the caller's seed, so samples are reproducible and
//! independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::Window;

/// A ChaCha8 stream for `(seed, stream)`.
pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform points in the world-coordinate box of `w`.
pub(crate) fn uniform_in_window(w: &Window, count: usize, seed: u64, stream: u64) -> Vec<Vec<f64>> {
    let half = w.half_width as f64 * w.spacing;
    let mut r = rng(seed, stream);
    (0..count)
        .map(|_| (0..w.dim).map(|_| r.gen_range(-half..=half)).collect())
        .collect()
}

/// Unit vector drawn uniformly from the sphere.
pub(crate) fn unit_vector<R: Rng>(r: &mut R, dim: usize) -> Vec<f64> {
    loop {
        // Marsaglia-style rejection from the cube.
        let v: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..=1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// World coordinates of every lattice point of `w`.
pub(crate) fn lattice_world_points(w: &Window) -> Vec<Vec<f64>> {
    crate::lattice::enumerate_window(w)
        .map(|pts| pts.iter().map(|p| p.to_world(w.spacing)).collect())
        .unwrap_or_default()
}

pub(crate) fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
