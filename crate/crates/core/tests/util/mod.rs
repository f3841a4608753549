//! Shared test support: the free-plane transport oracle and small helpers.
#![allow(dead_code)] // not every test target uses every helper
//!
//! The oracle simulates isotropic transport directly in the Euclidean
//! plane, with no complex machinery at all, and is the independent
//! reference for the diffusive-limit checks.

use flatwalk::rng::{path_rng, sample_exp};
use flatwalk::{Complex, Point};
use rand::Rng;

/// Displacement of free planar isotropic transport run at speed `eta` for
/// flow time `t / eta^2`: unit-rate exponential renewals of a uniformly
/// random heading.
pub fn planar_oracle_displacement(eta: f64, t: f64, seed: u64, index: u64) -> [f64; 2] {
    let mut rng = path_rng(seed, index);
    let mut x = 0.0f64;
    let mut y = 0.0f64;
    let horizon = t / (eta * eta);
    let mut clock = 0.0;
    let mut angle = rng.random::<f64>() * std::f64::consts::TAU;
    loop {
        let wait = sample_exp(&mut rng, 1.0);
        let step = wait.min(horizon - clock);
        x += eta * step * angle.cos();
        y += eta * step * angle.sin();
        clock += step;
        if clock >= horizon {
            return [x, y];
        }
        angle = rng.random::<f64>() * std::f64::consts::TAU;
    }
}

/// Exact per-coordinate variance of the scaled planar transport at
/// observed time `t`: `(2/n)(t - eta^2 (1 - exp(-t/eta^2)))` with n = 2.
pub fn planar_variance(eta: f64, t: f64) -> f64 {
    let big_t = t / (eta * eta);
    t - eta * eta * (1.0 - (-big_t).exp())
}

/// Euclidean distance between embedded points.
pub fn embedded_distance(c: &Complex, a: &Point, b: &Point) -> f64 {
    let pa = c.embed(a).expect("embedded complex");
    let pb = c.embed(b).expect("embedded complex");
    ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
}

/// Distance to the start with the cemetery at infinity.
pub fn distance_or_inf(c: &Complex, x0: &Point, p: &Option<Point>) -> f64 {
    match p {
        Some(q) => c.distance(x0, q).expect("distance computable"),
        None => f64::INFINITY,
    }
}
