//! Goodness-of-fit statistics and the replica-parallel runner shared by the
//! verification suites and the command line.

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Two-sided Kolmogorov-Smirnov distance between a sample and a reference
/// CDF: `sup_x |F_n(x) - F(x)|` evaluated at both sides of every jump.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(sup)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut b = b.to_vec();
    b.sort_unstable_by(|x, y| x.total_cmp(y));
    ks_distance(a, empirical_cdf(&b))
}

/// Step CDF of a sorted sample, by binary search.
pub fn empirical_cdf(sorted: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| {
        let idx = sorted.partition_point(|&v| v <= x);
        idx as f64 / sorted.len() as f64
    }
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities (cells with zero expectation must carry zero counts).
pub fn chi_square_statistic(observed: &[u64], expected_probs: &[f64]) -> Result<(f64, usize)> {
    if observed.is_empty() || observed.len() != expected_probs.len() {
        return Err(Error::EmptySample);
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut dof = observed.len();
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        if e == 0.0 {
            if o != 0 {
                return Err(Error::EmptySample);
            }
            dof -= 1;
            continue;
        }
        let d = o as f64 - e;
        stat += d * d / e;
    }
    Ok((stat, dof.saturating_sub(1)))
}

/// Upper quantile of the chi-square distribution with `dof` degrees.
pub fn chi_square_quantile(p: f64, dof: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof as f64).expect("dof > 0").inverse_cdf(p)
}

/// Sample Pearson correlation.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::EmptySample);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// CDF of `(N_1^2 + .. + N_k^2) / (lambda^2 + N_1^2 + .. + N_k^2)` for
/// independent standard Gaussians: a chi-square tail after the change of
/// variable `y = lambda^2 x / (1 - x)`.
pub fn sum_ratio_cdf(k: usize, lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let y = lambda * lambda * x / (1.0 - x);
    ChiSquared::new(k as f64).expect("k > 0").cdf(y)
}

/// Runs `replicas` independent jobs, each on its own generator stream
/// `(seed, index)`, in parallel with deterministic output order.
pub fn replica_map<T, F>(seed: u64, replicas: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::replica_rng(seed, i as u64 + 1);
            f(i, &mut rng)
        })
        .collect()
}

/// FNV-1a hash of a canonical config string, the provenance column carried
/// by every emitted CSV row and report.
pub fn config_hash(config: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in config.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Self-describing result of one goodness-of-fit check.
#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub suite: String,
    pub statistic: String,
    pub sample_size: usize,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub config: String,
    pub config_hash: String,
}

impl GofReport {
    pub fn new(
        suite: &str,
        statistic: &str,
        sample_size: usize,
        value: f64,
        tolerance: f64,
        seed: u64,
        config: String,
    ) -> Self {
        GofReport {
            suite: suite.to_string(),
            statistic: statistic.to_string(),
            sample_size,
            value,
            tolerance,
            pass: value <= tolerance,
            seed,
            config_hash: format!("{:016x}", config_hash(&config)),
            config,
        }
    }
}
