//! Distributional side of the mixture identity: signed-exponential mixture
//! densities and CDFs, seeded sampling of `S = sum_k mu_k X_k`, order
//! statistics of exponential samples, and Kolmogorov-Smirnov distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mixture::{theta_exponential, MixtureError, MuVector};

/// KS acceptance factor: a sample passes when `D_N < KS_CRITICAL / sqrt(N)`.
/// The asymptotic 95% point is 1.358; 1.95 keeps a fixed seed battery stable.
pub const KS_CRITICAL: f64 = 1.95;

/// Samples drawn per generator stream. Stream `b` covers indices
/// `b * SAMPLE_BLOCK .. (b + 1) * SAMPLE_BLOCK`, so output does not depend on
/// the number of worker threads.
pub const SAMPLE_BLOCK: usize = 8192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("rate must be strictly positive and finite, got {0}")]
    NonPositiveRate(f64),
    #[error("RankOutOfRange: need 1 <= n < L, got n = {rank}, L = {size}")]
    RankOutOfRange { size: u32, rank: u32 },
    #[error("need at least one sample")]
    EmptySample,
    #[error("samples must be sorted ascending")]
    Unsorted,
    #[error(transparent)]
    Mixture(#[from] MixtureError),
}

fn check_rate(lambda: f64) -> Result<(), DistError> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(DistError::NonPositiveRate(lambda))
    }
}

/// One signed-exponential component. `rate = lambda / mu_k` carries the sign
/// of `mu_k`: positive rates live on `x > 0`, negative ones on `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureTerm {
    pub weight: f64,
    pub rate: f64,
}

/// Law of `S = sum_k mu_k X_k` with `X_k ~ Exp(lambda)` i.i.d., written as
/// `sum_k theta_k * (law of mu_k X)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureLaw {
    terms: Vec<MixtureTerm>,
    lambda: f64,
    /// `|sum of f64 weights - 1|` after converting the exact `theta_k`.
    weight_rounding: f64,
}

impl MixtureLaw {
    pub fn new(mu: &MuVector, lambda: f64) -> Result<Self, DistError> {
        check_rate(lambda)?;
        let theta = theta_exponential(mu)?;
        let terms: Vec<MixtureTerm> = theta
            .to_f64()
            .into_iter()
            .zip(mu.to_f64())
            .map(|(weight, m)| MixtureTerm { weight, rate: lambda / m })
            .collect();
        let weight_rounding = (terms.iter().map(|t| t.weight).sum::<f64>() - 1.0).abs();
        Ok(MixtureLaw { terms, lambda, weight_rounding })
    }

    pub fn terms(&self) -> &[MixtureTerm] {
        &self.terms
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weight_rounding(&self) -> f64 {
        self.weight_rounding
    }

    /// Largest `1/|rate|`, the slowest tail scale.
    pub fn max_scale(&self) -> f64 {
        self.terms.iter().map(|t| 1.0 / t.rate.abs()).fold(0.0, f64::max)
    }

    /// Density; at `x = 0` the right limit.
    pub fn pdf(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| (t.rate > 0.0) == (x >= 0.0))
            .map(|t| t.weight * t.rate.abs() * (-t.rate * x).exp())
            .sum()
    }

    /// CDF, clamped to `[0, 1]` against rounding in the signed weights.
    pub fn cdf(&self, x: f64) -> f64 {
        let value: f64 = self
            .terms
            .iter()
            .map(|t| match (t.rate > 0.0, x >= 0.0) {
                (true, true) => -t.weight * (-t.rate * x).exp_m1(),
                (true, false) => 0.0,
                (false, true) => t.weight,
                (false, false) => t.weight * (-t.rate * x).exp(),
            })
            .sum();
        value.clamp(0.0, 1.0)
    }
}

/// Draws of `sum_k weights[k] * X_k` with `X_k ~ Exp(lambda)` via inverse
/// transform, deterministic in `seed`.
pub fn sample_weighted_sum(weights: &[f64], lambda: f64, n_samples: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; n_samples];
    out.par_chunks_mut(SAMPLE_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            for slot in chunk.iter_mut() {
                *slot = weights
                    .iter()
                    .map(|w| {
                        let u: f64 = rng.gen();
                        w * (-(-u).ln_1p() / lambda)
                    })
                    .sum();
            }
        });
    out
}

/// i.i.d. draws of `S = sum_k mu_k X_k`, `X_k ~ Exp(lambda)`.
pub fn sample_sum(mu: &MuVector, lambda: f64, n_samples: usize, seed: u64) -> Result<Vec<f64>, DistError> {
    check_rate(lambda)?;
    if n_samples == 0 {
        return Err(DistError::EmptySample);
    }
    Ok(sample_weighted_sum(&mu.to_f64(), lambda, n_samples, seed))
}

/// CDF of the `rank`-th smallest of `size` i.i.d. `Exp(lambda)` variables.
pub fn order_stat_cdf(size: u32, rank: u32, lambda: f64, x: f64) -> Result<f64, DistError> {
    check_rate(lambda)?;
    if rank == 0 || rank > size {
        return Err(DistError::RankOutOfRange { size, rank });
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let f = -(-lambda * x).exp_m1();
    let g = (-lambda * x).exp();
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=size {
        if j > 0 {
            binom = binom * f64::from(size - j + 1) / f64::from(j);
        }
        if j >= rank {
            total += binom * f.powi(j as i32) * g.powi((size - j) as i32);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Two-sided KS distance between the empirical CDF of sorted `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64, DistError> {
    if samples.is_empty() {
        return Err(DistError::EmptySample);
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(DistError::Unsorted);
    }
    let n = samples.len() as f64;
    Ok(samples.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    }))
}

pub fn sort_samples(samples: &mut [f64]) {
    samples.par_sort_unstable_by(f64::total_cmp);
}

/// Which of `S` and `S / lambda` follows the order-statistic law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RenyiMatch {
    S,
    SOverLambda,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenyiReport {
    pub size: u32,
    pub rank: u32,
    pub lambda: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub ks_s: f64,
    pub ks_s_over_lambda: f64,
    pub threshold: f64,
    pub matching: RenyiMatch,
}

/// Samples `S = sum_{k<=rank} X_k / (size - k + 1)` and measures KS distances
/// of both `S` and `S / lambda` against the `rank`-th order statistic of
/// `size` exponentials with rate `lambda`.
pub fn renyi_check(
    size: u32,
    rank: u32,
    lambda: f64,
    n_samples: usize,
    seed: u64,
) -> Result<RenyiReport, DistError> {
    check_rate(lambda)?;
    if rank == 0 || rank >= size {
        return Err(DistError::RankOutOfRange { size, rank });
    }
    if n_samples == 0 {
        return Err(DistError::EmptySample);
    }
    let weights: Vec<f64> = (1..=rank).map(|k| 1.0 / f64::from(size - k + 1)).collect();
    let mut s = sample_weighted_sum(&weights, lambda, n_samples, seed);
    sort_samples(&mut s);
    let cdf = |x: f64| order_stat_cdf(size, rank, lambda, x).expect("rank checked above");
    let ks_s = ks_statistic(&s, cdf)?;
    let scaled: Vec<f64> = s.iter().map(|x| x / lambda).collect();
    let ks_s_over_lambda = ks_statistic(&scaled, cdf)?;

    let threshold = KS_CRITICAL / (n_samples as f64).sqrt();
    let matching = match (ks_s < threshold, ks_s_over_lambda < threshold) {
        (true, true) => RenyiMatch::Both,
        (true, false) => RenyiMatch::S,
        (false, true) => RenyiMatch::SOverLambda,
        (false, false) => RenyiMatch::Neither,
    };
    Ok(RenyiReport {
        size,
        rank,
        lambda,
        n_samples,
        seed,
        ks_s,
        ks_s_over_lambda,
        threshold,
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::Family;
    use crate::symfunc::Rational;

    fn mu(items: &[i64]) -> MuVector {
        MuVector::new(items.iter().map(|&x| Rational::from(x)).collect(), Family::Exponential)
            .unwrap()
    }

    #[test]
    fn pdf_examples() {
        let law = MixtureLaw::new(&mu(&[1, 2]), 1.0).unwrap();
        let expected = -(-1.0f64).exp() + (-0.5f64).exp();
        assert!((law.pdf(1.0) - expected).abs() < 1e-15);
        assert!((law.pdf(1.0) - 0.23865).abs() < 1e-5);
        assert_eq!(law.pdf(-1.0), 0.0);

        let lap = MixtureLaw::new(&mu(&[1, -1]), 1.0).unwrap();
        for x in [-3.0_f64, -0.5, 0.25, 2.0] {
            let f: f64 = 0.5 * (-x.abs()).exp();
            assert!((lap.pdf(x) - f).abs() < 1e-15);
        }
    }

    #[test]
    fn cdf_examples() {
        let law = MixtureLaw::new(&mu(&[1, 2]), 1.0).unwrap();
        assert!((law.cdf(1e3) - 1.0).abs() < 1e-15);
        assert_eq!(law.cdf(0.0), 0.0);
        assert_eq!(law.cdf(-5.0), 0.0);
        let lap = MixtureLaw::new(&mu(&[1, -1]), 1.0).unwrap();
        assert!((lap.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!(lap.cdf(-1e3) < 1e-15);
    }

    #[test]
    fn cdf_derivative_matches_pdf() {
        let law = MixtureLaw::new(&mu(&[1, -3, 2]), 1.5).unwrap();
        let h = 1e-4;
        for i in 1..200 {
            let x = -10.0 + 0.1 * i as f64;
            if x.abs() < 10.0 * h {
                continue;
            }
            let fd = (law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h);
            assert!((fd - law.pdf(x)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn order_stat_examples() {
        let x = 0.7;
        let got = order_stat_cdf(1, 1, 2.0, x).unwrap();
        assert!((got - (1.0 - (-2.0 * x).exp())).abs() < 1e-15);
        let got = order_stat_cdf(2, 2, 1.0, 2f64.ln()).unwrap();
        assert!((got - 0.25).abs() < 1e-15);
        assert_eq!(order_stat_cdf(7, 3, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(
            order_stat_cdf(3, 4, 1.0, 1.0),
            Err(DistError::RankOutOfRange { size: 3, rank: 4 })
        );
        assert!(order_stat_cdf(3, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ks_examples() {
        let d = ks_statistic(&[0.0], |x| if x >= 0.0 { 0.5 } else { 0.0 }).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(ks_statistic(&[], |_| 0.0), Err(DistError::EmptySample));
        assert_eq!(ks_statistic(&[2.0, 1.0], |_| 0.0), Err(DistError::Unsorted));
    }

    #[test]
    fn ks_detects_wrong_rate() {
        let mut s = sample_weighted_sum(&[1.0], 1.0, 10_000, 7);
        sort_samples(&mut s);
        let d = ks_statistic(&s, |x| if x > 0.0 { 1.0 - (-2.0 * x).exp() } else { 0.0 }).unwrap();
        assert!(d > 0.1, "d = {d}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let v = mu(&[1, -2, 3]);
        let a = sample_sum(&v, 1.0, 20_000, 42).unwrap();
        let b = sample_sum(&v, 1.0, 20_000, 42).unwrap();
        let c = sample_sum(&v, 1.0, 20_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // prefix stability: the first block does not depend on the total count
        let short = sample_sum(&v, 1.0, 100, 42).unwrap();
        assert_eq!(&a[..100], &short[..]);
    }

    #[test]
    fn sampling_independent_of_thread_count() {
        let v = mu(&[1, 2]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_sum(&v, 1.0, 50_000, 9).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sample_mean_examples() {
        let n = 100_000;
        let s = sample_sum(&mu(&[1, 2]), 1.0, n, 1).unwrap();
        let mean = s.iter().sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 3.0 * 5f64.sqrt() / (n as f64).sqrt());
        let s = sample_sum(&mu(&[1, -1]), 1.0, n, 1).unwrap();
        let mean = s.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * 2f64.sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn renyi_rejects_bad_rank() {
        assert_eq!(
            renyi_check(2, 2, 1.0, 10, 0),
            Err(DistError::RankOutOfRange { size: 2, rank: 2 })
        );
        assert!(renyi_check(3, 0, 1.0, 10, 0).is_err());
    }
}
