//! Deterministic random streams.
//!
//! A run owns one 64-bit master seed. Every simulated path gets its own
//! ChaCha stream keyed by the master seed and the path index, so paths are
//! independent of each other and of the thread that happens to compute
//! them. Distinct estimators within one run derive sub-seeds with
//! [`derive_seed`] and a fixed salt.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random stream used by one path / walk.
pub type PathRng = ChaCha8Rng;

/// Stream for path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derive an independent sub-seed from a master seed and a salt
/// (splitmix64 finalizer).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exponential variate with the given rate.
pub fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Uniform direction on the unit sphere of `dim`-dimensional chart space.
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    assert!(dim >= 1);
    if dim == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let n = crate::linalg::norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the unit ball of the given dimension; `dim == 0`
/// returns the empty vector.
pub fn sample_unit_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let dir = sample_unit_sphere(rng, dim);
    let r = rng.random::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|x| x * r).collect()
}
