//! Estimates, streaming moments and Kolmogorov-Smirnov diagnostics.

use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate: sample mean, its standard error and the sample
/// count.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl Estimate {
    /// Mean and standard error of a sample, accumulated in a fixed
    /// sequential order so results are independent of thread scheduling.
    pub fn from_values(values: &[f64]) -> Self {
        let mut acc = Moments::new();
        for &v in values {
            acc.push(v);
        }
        Estimate {
            value: acc.mean(),
            std_error: acc.std_error(),
            n_samples: acc.count(),
        }
    }

    /// Binomial proportion estimate.
    pub fn from_binomial(successes: usize, trials: usize) -> Self {
        let p = successes as f64 / trials as f64;
        Estimate {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            n_samples: trials,
        }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_std_error(&self, other: &Estimate) -> f64 {
        (self.std_error.powi(2) + other.std_error.powi(2)).sqrt()
    }
}

/// Streaming central moments up to order four (Welford updates).
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0)
            + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Kurtosis (the Gaussian value is 3).
    pub fn kurtosis(&self) -> f64 {
        let n = self.n as f64;
        n * self.m4 / (self.m2 * self.m2)
    }
}

/// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
pub fn ks_statistic_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = (f - i as f64 / n).abs();
        let hi = ((i as f64 + 1.0) / n - f).abs();
        d = d.max(lo).max(hi);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.total_cmp(q));
    ys.sort_unstable_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut d = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample rejection threshold at level `alpha`.
pub fn ks_two_sample_threshold(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Asymptotic one-sample rejection threshold at level `alpha`.
pub fn ks_one_sample_threshold(n: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c / (n as f64).sqrt()
}

/// Pearson correlation of paired samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn moments_match_direct_formulas() {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.5, -3.0];
        let mut m = Moments::new();
        for &x in &xs {
            m.push(x);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-12);
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>();
        assert!((m.kurtosis() - n * m4 / (m2 * m2)).abs() < 1e-12);
    }

    #[test]
    fn ks_uniform_sanity() {
        let mut rng = crate::rng::path_rng(42, 0);
        let xs: Vec<f64> = (0..50_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic_cdf(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_one_sample_threshold(xs.len(), 0.01), "d = {d}");
    }

    #[test]
    fn ks_detects_shift() {
        let mut rng = crate::rng::path_rng(43, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() + 0.1).collect();
        let d = ks_statistic_two_sample(&xs, &ys);
        assert!(d > ks_two_sample_threshold(xs.len(), ys.len(), 0.01));
    }

    #[test]
    fn ks_two_sample_same_distribution_passes() {
        let mut rng = crate::rng::path_rng(44, 0);
        let xs: Vec<f64> = (0..30_000).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..30_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic_two_sample(&xs, &ys);
        assert!(d < ks_two_sample_threshold(xs.len(), ys.len(), 0.01));
    }

    #[test]
    fn binomial_estimate() {
        let e = Estimate::from_binomial(25, 100);
        assert!((e.value - 0.25).abs() < 1e-15);
        assert!((e.std_error - (0.25 * 0.75 / 100.0f64).sqrt()).abs() < 1e-15);
    }
}
