//! Seeded random sampling primitives. Every stochastic routine in the crate
//! draws from a `ChaCha8Rng` seeded by the caller, so runs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Vector;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a salt.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform direction on the Euclidean unit sphere (normalized Gaussian).
pub fn unit_direction(rng: &mut impl Rng, dim: usize) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Uniform point of the closed Euclidean ball.
pub fn uniform_in_ball(rng: &mut impl Rng, center: &Vector, radius: f64) -> Vector {
    let dim = center.len();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / dim as f64);
    center + unit_direction(rng, dim) * r
}

pub fn uniform_in_box(rng: &mut impl Rng, lo: &Vector, hi: &Vector) -> Vector {
    Vector::from_fn(lo.len(), |i, _| {
        let u: f64 = rng.random();
        lo[i] + u * (hi[i] - lo[i])
    })
}
