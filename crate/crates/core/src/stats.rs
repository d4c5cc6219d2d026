//! Empirical distribution tools: CCDFs, two-sample Kolmogorov-Smirnov tests
//! and descriptive summaries.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Complementary cumulative distribution `P(X >= x)` at each distinct value.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccdf {
    pub points: Vec<(f64, f64)>,
}

impl Ccdf {
    /// `P(X >= x)` for arbitrary `x`.
    pub fn at(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&(v, _)| v < x);
        self.points.get(idx).map_or(0.0, |&(_, p)| p)
    }
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut v = sample.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

pub fn ccdf(sample: &[f64]) -> Result<Ccdf> {
    let sorted = sorted_finite(sample)?;
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        points.push((v, (sorted.len() - i) as f64 / n));
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    Ok(Ccdf { points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    let xs = sorted_finite(x)?;
    let ys = sorted_finite(y)?;
    let d = ks_statistic_sorted(&xs, &ys);
    let (n, m) = (xs.len(), ys.len());
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let sq = libm::sqrt(ne);
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    Ok(KsResult { d_statistic: d, p_value: kolmogorov_q(lambda), n, m })
}

/// Largest ECDF gap via one merged pass over both sorted samples. Ties are
/// consumed as a block so the gap is only measured between distinct values.
fn ks_statistic_sorted(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == t {
            i += 1;
        }
        while j < ys.len() && ys[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    // Once one sample is exhausted the remaining gap only shrinks to 0, but
    // the value right after the last step was already recorded.
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
///
/// The alternating series is summed until terms drop below 1e-12. For small
/// λ, where it converges slowly, the equivalent Jacobi-theta form
/// `1 − √(2π)/λ Σ exp(−(2k−1)²π²/(8λ²))` is used instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.6 {
        let mut cdf = 0.0;
        let c = core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        for k in 1..=64u32 {
            let odd = f64::from(2 * k - 1);
            let term = libm::exp(-odd * odd * c);
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        cdf *= libm::sqrt(2.0 * core::f64::consts::PI) / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    let a = -2.0 * lambda * lambda;
    for k in 1..=100_000u32 {
        let kk = f64::from(k);
        let term = libm::exp(a * kk * kk);
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Count, moments and five-number summary of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    /// Whether `mean`/`std` are over `log10(x + 1)`.
    pub log_transformed: bool,
    pub mean: f64,
    /// Sample standard deviation (n − 1); zero for a single value.
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub tukey_outliers: usize,
    /// `1.96 · std / √count`.
    pub ci95_halfwidth: f64,
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, libm::sqrt(ss / (n - 1.0)))
}

pub fn summary_stats(sample: &[f64], log_transform: bool) -> Result<SummaryStats> {
    let sorted = sorted_finite(sample)?;
    let (mean, std) = if log_transform {
        let logs: Vec<f64> = sorted.iter().map(|&x| libm::log10(x + 1.0)).collect();
        mean_std(&logs)
    } else {
        mean_std(&sorted)
    };
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let count = sorted.len();
    Ok(SummaryStats {
        count,
        log_transformed: log_transform,
        mean,
        std,
        min: sorted[0],
        q1,
        median: quantile_sorted(&sorted, 0.5),
        q3,
        max: sorted[count - 1],
        tukey_outliers: sorted.iter().filter(|&&x| x < lo || x > hi).count(),
        ci95_halfwidth: 1.96 * std / libm::sqrt(count as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn ecdf(sample: &[f64], t: f64) -> f64 {
        sample.iter().filter(|&&v| v <= t).count() as f64 / sample.len() as f64
    }

    /// Brute force over every sample point.
    fn brute_d(x: &[f64], y: &[f64]) -> f64 {
        x.iter().chain(y).map(|&t| (ecdf(x, t) - ecdf(y, t)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn ccdf_examples() {
        assert_eq!(ccdf(&[5.0, 5.0, 5.0]).unwrap().points, vec![(5.0, 1.0)]);
        assert_eq!(ccdf(&[1.0, 1.0, 2.0, 3.0]).unwrap().points, vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)]);
        assert_eq!(ccdf(&[]), Err(Error::EmptySample));
        assert_eq!(ccdf(&[f64::NAN]), Err(Error::NonFinite));
        let c = ccdf(&[1.0, 2.0]).unwrap();
        assert_eq!(c.at(0.0), 1.0);
        assert_eq!(c.at(1.5), 0.5);
        assert_eq!(c.at(9.0), 0.0);
    }

    #[test]
    fn ks_examples() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.d_statistic, r.p_value), (0.0, 1.0));
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap().d_statistic, 1.0);
        assert_eq!(ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap().d_statistic, 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn ks_large_disjoint_is_significant() {
        let x: Vec<f64> = (0..500).map(f64::from).collect();
        let y: Vec<f64> = (1000..1500).map(f64::from).collect();
        let r = ks_two_sample(&x, &y).unwrap();
        assert_eq!(r.d_statistic, 1.0);
        assert!(r.p_value < 1e-100);
    }

    #[test]
    fn q_function_branches_agree() {
        // Both forms are exact; they must agree where both converge fast.
        for &l in &[0.5, 0.6, 0.7, 0.9, 1.1] {
            let mut series = 0.0;
            for k in 1..200 {
                let kk = k as f64;
                let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                series += s * libm::exp(-2.0 * kk * kk * l * l);
            }
            let theta = {
                let c = core::f64::consts::PI.powi(2) / (8.0 * l * l);
                let s: f64 = (1..64).map(|k| libm::exp(-((2 * k - 1) as f64).powi(2) * c)).sum();
                1.0 - s * (2.0 * core::f64::consts::PI).sqrt() / l
            };
            assert!((2.0 * series - theta).abs() < 1e-10, "lambda {l}");
            assert!((kolmogorov_q(l) - theta).abs() < 1e-10);
        }
        // Known value: Q(1.36) ~= 0.0494
        assert!((kolmogorov_q(1.36) - 0.049_48).abs() < 1e-4);
    }

    #[test]
    fn summary_examples() {
        let s = summary_stats(&[1.0, 3.0], true).unwrap();
        assert!((s.mean - (2f64.log10() + 4f64.log10()) / 2.0).abs() < 1e-12);
        assert!((s.mean - 0.4515).abs() < 1e-4);

        let s = summary_stats(&[1.0, 2.0, 3.0, 4.0, 100.0], false).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!(s.tukey_outliers, 1);
        assert_eq!((s.min, s.max), (1.0, 100.0));

        let s = summary_stats(&[7.0, 7.0, 7.0], false).unwrap();
        assert_eq!((s.std, s.ci95_halfwidth), (0.0, 0.0));
        assert!(summary_stats(&[], false).is_err());
    }

    proptest! {
        #[test]
        fn merged_scan_equals_brute_force(
            x in proptest::collection::vec(0i32..20, 1..40),
            y in proptest::collection::vec(0i32..20, 1..40),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let r = ks_two_sample(&x, &y).unwrap();
            prop_assert_eq!(r.d_statistic, brute_d(&x, &y));
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }

        #[test]
        fn ccdf_non_increasing(x in proptest::collection::vec(-1e6f64..1e6, 1..100)) {
            let c = ccdf(&x).unwrap();
            prop_assert_eq!(c.points[0].1, 1.0);
            prop_assert!(c.points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
        }

        #[test]
        fn summary_permutation_invariant(mut x in proptest::collection::vec(0f64..1e4, 1..60), seed in any::<u64>()) {
            let a = summary_stats(&x, true).unwrap();
            crate::rng::Rng::new(seed).shuffle(&mut x);
            let b = summary_stats(&x, true).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.min <= a.q1 && a.q1 <= a.median && a.median <= a.q3 && a.q3 <= a.max);
        }
    }
}
