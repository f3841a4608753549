//! Diffusive rescaling of the transport process.
//!
//! The scaled process at scale `eta` runs the base renewal chain at
//! geodesic speed `eta` and is observed at flow time `t / eta^2`, so one
//! observed time unit costs `1 / eta^2` flow time and the path is
//! Lipschitz in observed time with constant `1 / eta`. Scale one reproduces
//! the base process pathwise under the same stream.
//!
//! The module provides direct sampling of scaled paths, empirical
//! finite-dimensional distributions, the pairwise Kolmogorov-Smirnov sweep
//! across scales, the windowed min-distance tightness statistic, and the
//! small-scale Brownian sampler. The Brownian sampler deliberately exposes
//! its resolution parameter: it returns the scaled process at that scale
//! and makes no claim beyond the sweep diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{Complex, ComplexError, Point};
use crate::rng::path_rng;
use crate::stats;
use crate::transport::{simulate_path, PathSample, TransportParams, Walker};

/// Transport parameters realizing scale `eta`.
pub fn scaled_params(eta: f64) -> TransportParams {
    assert!(eta > 0.0);
    TransportParams {
        speed: eta,
        ..TransportParams::default()
    }
}

/// Observed time to flow time.
pub fn flow_time(eta: f64, t: f64) -> f64 {
    t / (eta * eta)
}

/// Simulate one scaled path up to an observed-time horizon.
pub fn sample_scaled_path(
    c: &Complex,
    x0: &Point,
    eta: f64,
    horizon: f64,
    seed: u64,
    path_index: u64,
) -> Result<PathSample, ComplexError> {
    simulate_path(
        c,
        x0,
        flow_time(eta, horizon),
        scaled_params(eta),
        seed,
        path_index,
    )
}

/// Positions of one scaled path at increasing observed times; `None` is
/// the cemetery.
pub fn observe_scaled(
    c: &Complex,
    x0: &Point,
    eta: f64,
    times: &[f64],
    seed: u64,
    path_index: u64,
) -> Result<Vec<Option<Point>>, ComplexError> {
    let rng = path_rng(seed, path_index);
    let mut w = Walker::new(c, x0, scaled_params(eta), rng)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        w.advance_to(flow_time(eta, t), |_| {});
        out.push(w.position());
    }
    Ok(out)
}

/// Empirical finite-dimensional distribution: per-path tuples of positions
/// at fixed observed times.
#[derive(Clone, Debug)]
pub struct EmpiricalFdd {
    pub eta: f64,
    pub times: Vec<f64>,
    pub start: Point,
    pub samples: Vec<Vec<Option<Point>>>,
}

/// Sample `n_paths` independent tuples of the scaled process at the given
/// observed times.
pub fn estimate_fdd(
    c: &Complex,
    x0: &Point,
    eta: f64,
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<EmpiricalFdd, ComplexError> {
    assert!(!times.is_empty());
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    let samples: Vec<Vec<Option<Point>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| observe_scaled(c, x0, eta, times, seed, i).expect("start in complex"))
        .collect();
    Ok(EmpiricalFdd {
        eta,
        times: times.to_vec(),
        start: x0.clone(),
        samples,
    })
}

/// Report of the pairwise convergence sweep across scales.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub etas: Vec<f64>,
    pub t: f64,
    /// KS distance between displacement laws of consecutive scales.
    pub ks_pairs: Vec<f64>,
    /// Asymptotic rejection threshold at level 0.01.
    pub threshold: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Two-sample KS distances between the laws of the displacement
/// `d(x0, Y_t)` at consecutive scales. Distinct scales use distinct
/// sub-streams; absorbed paths enter as an atom at infinity.
pub fn convergence_sweep(
    c: &Complex,
    x0: &Point,
    etas: &[f64],
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SweepReport, ComplexError> {
    assert!(etas.len() >= 2);
    assert!(etas.windows(2).all(|w| w[0] > w[1]), "scales must decrease");
    let mut per_eta: Vec<Vec<f64>> = Vec::with_capacity(etas.len());
    for (k, &eta) in etas.iter().enumerate() {
        let sub = crate::rng::derive_seed(seed, k as u64 + 1);
        let dists: Vec<f64> = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let pts = observe_scaled(c, x0, eta, &[t], sub, i).expect("start in complex");
                match &pts[0] {
                    Some(p) => c
                        .distance(x0, p)
                        .expect("complex supports distances from the start"),
                    None => f64::INFINITY,
                }
            })
            .collect();
        per_eta.push(dists);
    }
    let ks_pairs: Vec<f64> = per_eta
        .windows(2)
        .map(|w| stats::ks_statistic_two_sample(&w[0], &w[1]))
        .collect();
    Ok(SweepReport {
        etas: etas.to_vec(),
        t,
        ks_pairs,
        threshold: stats::ks_two_sample_threshold(n_paths, n_paths, 0.01),
        n_paths,
        seed,
    })
}

/// Window family for the tightness statistic.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TightnessGrid {
    /// Observed-time horizon.
    pub horizon: f64,
    /// Window half-width (c).
    pub window: f64,
    /// Observation mesh (delta).
    pub mesh: f64,
}

/// Report of the windowed min-distance statistic.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TightnessReport {
    pub eta: f64,
    pub grid: TightnessGrid,
    pub epsilon: f64,
    /// Fraction of paths whose supremum statistic exceeds epsilon.
    pub probability: f64,
    /// Mean of the supremum statistic, as a diagnostic.
    pub mean_sup: f64,
    pub n_paths: usize,
}

/// Empirical probability that the supremum over the discretized window
/// family of `min(d(Y_t1, Y_t), d(Y_t, Y_t2))` exceeds `epsilon`, with
/// `t1 < t2` ranging over the mesh inside the window around each center
/// `t`.
///
/// For fixed distances from a center, the best pair realizes the
/// second-largest distance inside the window, and the speed bound caps the
/// statistic at `window / eta`.
pub fn tightness_stat(
    c: &Complex,
    x0: &Point,
    eta: f64,
    grid: TightnessGrid,
    epsilon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<TightnessReport, ComplexError> {
    assert!(grid.window > 0.0 && grid.horizon > 0.0 && grid.mesh > 0.0);
    let steps = (grid.horizon / grid.mesh).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * grid.mesh).collect();
    let wsteps = (grid.window / grid.mesh).ceil() as usize;

    let sups: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let pts = observe_scaled(c, x0, eta, &times, seed, i).expect("start in complex");
            let mut sup = 0.0f64;
            for k in 0..times.len() {
                let lo = k.saturating_sub(wsteps);
                let hi = (k + wsteps).min(times.len() - 1);
                let mut best = 0.0f64;
                let mut second = 0.0f64;
                for j in lo..=hi {
                    if j == k || (times[j] - times[k]).abs() >= grid.window {
                        continue;
                    }
                    let d = pair_distance(c, &pts[j], &pts[k]);
                    if d > best {
                        second = best;
                        best = d;
                    } else if d > second {
                        second = d;
                    }
                }
                sup = sup.max(second);
            }
            sup
        })
        .collect();

    let exceed = sups.iter().filter(|&&s| s > epsilon).count();
    let mean_sup = sups.iter().sum::<f64>() / n_paths.max(1) as f64;
    Ok(TightnessReport {
        eta,
        grid,
        epsilon,
        probability: exceed as f64 / n_paths.max(1) as f64,
        mean_sup,
        n_paths,
    })
}

/// Distance on the compactified complex: live pairs use the intrinsic
/// distance, the cemetery is at distance zero from itself and infinity
/// from every live point.
fn pair_distance(c: &Complex, a: &Option<Point>, b: &Option<Point>) -> f64 {
    match (a, b) {
        (Some(p), Some(q)) => c.distance(p, q).expect("complex supports distances"),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

/// The operational Brownian sample: the scaled process at the stated
/// resolution, observed at `t`. Explicitly an approximation at scale
/// `eta_resolution`.
pub fn brownian_sample(
    c: &Complex,
    x0: &Point,
    t: f64,
    eta_resolution: f64,
    seed: u64,
    path_index: u64,
) -> Result<Option<Point>, ComplexError> {
    if t == 0.0 {
        return Ok(Some(x0.clone()));
    }
    Ok(observe_scaled(c, x0, eta_resolution, &[t], seed, path_index)?.remove(0))
}

/// Two-stage scaled evaluation used by the empirical Chapman-Kolmogorov
/// check: run to observed time `t`, restart from the reached position with
/// a fresh uniform direction, run a further `s`.
pub fn observe_scaled_composed(
    c: &Complex,
    x0: &Point,
    eta: f64,
    t: f64,
    s: f64,
    seed: u64,
    path_index: u64,
) -> Result<Option<Point>, ComplexError> {
    let rng = path_rng(seed, path_index);
    let params = scaled_params(eta);
    let mut w = Walker::new(c, x0, params, rng)?;
    w.advance_to(flow_time(eta, t), |_| {});
    let Some(mid) = w.position() else {
        return Ok(None);
    };
    let rng = w.into_rng();
    let mut w2 = Walker::new(c, &mid, params, rng)?;
    w2.advance_to(flow_time(eta, s), |_| {});
    Ok(w2.position())
}
