#![allow(dead_code)]

use polarfact::measures::{DiscreteMeasure, SampledMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect()
}

/// Positive weights summing to `total`.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w * total / s).collect()
}

/// A transport instance u : X → ℝᵈ and Y ⊂ ℝᵈ with equal masses.
pub struct Instance {
    pub u: SampledMap,
    pub y: DiscreteMeasure,
}

pub fn uniform_instance(seed: u64, n: usize, dim: usize) -> Instance {
    let mut r = rng(seed);
    let x = DiscreteMeasure::abstract_space(vec![1.0 / n as f64; n]).unwrap();
    let u = SampledMap::new(x, random_points(&mut r, n, dim)).unwrap();
    let y = DiscreteMeasure::uniform(random_points(&mut r, n, dim), 1.0).unwrap();
    Instance { u, y }
}

pub fn weighted_instance(seed: u64, nx: usize, ny: usize, dim: usize) -> Instance {
    let mut r = rng(seed);
    let x = DiscreteMeasure::abstract_space(random_weights(&mut r, nx, 1.0)).unwrap();
    let u = SampledMap::new(x, random_points(&mut r, nx, dim)).unwrap();
    let pts = random_points(&mut r, ny, dim);
    let w = random_weights(&mut r, ny, 1.0);
    let y = DiscreteMeasure::from_points(pts, w).unwrap();
    Instance { u, y }
}

/// Uniform instance whose map takes values in a small pool, so level sets
/// carry several points.
pub fn clustered_instance(seed: u64, n: usize, pool: usize, dim: usize) -> Instance {
    let mut r = rng(seed);
    let values = random_points(&mut r, pool, dim);
    let x = DiscreteMeasure::abstract_space(vec![1.0 / n as f64; n]).unwrap();
    let u = SampledMap::new(x, (0..n).map(|_| values[r.gen_range(0..pool)].clone()).collect()).unwrap();
    let y = DiscreteMeasure::uniform(random_points(&mut r, n, dim), 1.0).unwrap();
    Instance { u, y }
}

/// The mixed suite shared by several checks: uniform, weighted, rectangular
/// and clustered instances in dimensions 1 to 3.
pub fn suite() -> Vec<Instance> {
    let mut out = Vec::new();
    for k in 0..60u64 {
        let dim = 1 + (k % 3) as usize;
        let out_inst = match k % 4 {
            0 => uniform_instance(1000 + k, 3 + (k as usize * 7) % 40, dim),
            1 => weighted_instance(1000 + k, 4 + (k as usize * 5) % 50, 3 + (k as usize * 11) % 45, dim),
            2 => clustered_instance(1000 + k, 6 + (k as usize * 3) % 30, 3, dim),
            _ => weighted_instance(1000 + k, 60, 60, dim),
        };
        out.push(out_inst);
    }
    out
}
