//! Binomial confidence intervals and trend tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Wilson score interval for `successes` out of `trials` at two-sided
/// confidence `1 − alpha`.
pub fn wilson_interval(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Mann–Kendall trend test result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannKendall {
    pub s: i64,
    pub variance: f64,
    pub z: f64,
    /// One-sided p-value for an upward trend.
    pub p_increasing: f64,
    /// Two-sided p-value.
    pub p_two_sided: f64,
}

impl MannKendall {
    pub fn increasing_at(&self, alpha: f64) -> bool {
        self.p_increasing < alpha
    }
}

/// Mann–Kendall statistic with the tie-corrected variance and continuity correction.
pub fn mann_kendall(series: &[f64]) -> MannKendall {
    let n = series.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += match series[j].partial_cmp(&series[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        ties += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j + 1;
    }
    let nf = n as f64;
    let variance = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - ties) / 18.0;
    let z = if variance <= 0.0 {
        0.0
    } else if s > 0 {
        (s as f64 - 1.0) / variance.sqrt()
    } else if s < 0 {
        (s as f64 + 1.0) / variance.sqrt()
    } else {
        0.0
    };
    let norm = Normal::standard();
    MannKendall {
        s,
        variance,
        z,
        p_increasing: 1.0 - norm.cdf(z),
        p_two_sided: 2.0 * (1.0 - norm.cdf(z.abs())),
    }
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_interval(10, 100, 0.05);
        assert!((lo - 0.05523).abs() < 1e-4, "{lo}");
        assert!((hi - 0.17437).abs() < 1e-4, "{hi}");
        let (lo, hi) = wilson_interval(0, 50, 0.05);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.07135).abs() < 1e-4, "{hi}");
    }

    proptest! {
        #[test]
        fn wilson_contains_estimate(k in 0u64..200, extra in 0u64..200) {
            let n = k + extra + 1;
            let (lo, hi) = wilson_interval(k, n, 0.05);
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn mann_kendall_detects_trends() {
        let up: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let r = mann_kendall(&up);
        assert_eq!(r.s, 45);
        assert!(r.increasing_at(0.05));
        let down: Vec<f64> = up.iter().rev().copied().collect();
        assert!(!mann_kendall(&down).increasing_at(0.05));
        let flat = vec![2.0; 10];
        let f = mann_kendall(&flat);
        assert_eq!(f.s, 0);
        assert!(!f.increasing_at(0.05));
    }

    #[test]
    fn mann_kendall_variance_without_ties() {
        let r = mann_kendall(&[1.0, 3.0, 2.0, 5.0, 4.0]);
        assert_eq!(r.s, 6);
        assert!((r.variance - 50.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
