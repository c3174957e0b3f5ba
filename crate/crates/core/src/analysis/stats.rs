//! Goodness-of-fit and correlation tests.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::model::Configuration;

/// Smallest sample accepted by the KS helpers.
pub const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub n: usize,
    pub statistic: f64,
    pub p: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{j-1} exp(-2 j² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_q((root + 0.12 + 0.11 / root) * d)
}

fn require(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: n });
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<TestOutcome> {
    require(sample.len())?;
    let xs = sorted(sample);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    Ok(TestOutcome { n: xs.len(), statistic: d, p: ks_p(d, n) })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn two_sample_test(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    require(a.len().min(b.len()))?;
    let (xs, ys) = (sorted(a), sorted(b));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(TestOutcome { n: xs.len() + ys.len(), statistic: d, p: ks_p(d, n * m / (n + m)) })
}

/// Exponential(rate) CDF.
pub fn exponential_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

/// KS test of the gaps of `config` against Exponential(`rate`).
///
/// On an interval the consecutive gaps are used. On a cycle with `ℓ`
/// particles the `ℓ` spacings (wrap included) of a uniform configuration
/// each have CDF `1 - (1 - g/N)^{ℓ-1}`, which is tested instead.
pub fn gof_exponential_gaps(config: &Configuration, rate: f64) -> Result<TestOutcome> {
    if !(rate > 0.0) {
        return Err(Error::NonPositiveRate(rate));
    }
    let ps = config.positions();
    let g = config.geometry();
    let mut gaps: Vec<f64> = ps.windows(2).map(|w| w[1] - w[0]).collect();
    if g.is_cycle() {
        if let (Some(&first), Some(&last)) = (ps.first(), ps.last()) {
            if ps.len() > 1 {
                gaps.push(g.forward_distance(last, first));
            }
        }
        require(gaps.len())?;
        let (n, k) = (g.length(), gaps.len() as f64);
        ks_one_sample(&gaps, |x| if x <= 0.0 { 0.0 } else if x >= n { 1.0 } else { 1.0 - (1.0 - x / n).powf(k - 1.0) })
    } else {
        ks_one_sample(&gaps, exponential_cdf(rate))
    }
}

/// Chi-square test of counts against Poisson(`mean`) with known mean:
/// `Σ (O - E)² / E` on as many degrees of freedom as there are cells.
pub fn chi_square_poisson(counts: &[usize], mean: f64) -> Result<TestOutcome> {
    if counts.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if !(mean > 0.0) {
        return Err(Error::NonPositiveRate(mean));
    }
    let stat: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
    let dist = ChiSquared::new(counts.len() as f64).expect("positive degrees of freedom");
    Ok(TestOutcome { n: counts.len(), statistic: stat, p: 1.0 - dist.cdf(stat) })
}

/// Sample Pearson correlation. Returns 0 when either sample is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameters("correlation needs paired samples".into()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: x.len() });
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Correlation test: the statistic is `|r| √(n - 1)`, compared with a
/// number of standard deviations. The p-value is the two-sided normal tail.
pub fn correlation_test(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    let r = pearson(x, y)?;
    let z = r.abs() * ((x.len() - 1) as f64).sqrt();
    Ok(TestOutcome { n: x.len(), statistic: z, p: statrs::function::erf::erfc(z / std::f64::consts::SQRT_2) })
}
