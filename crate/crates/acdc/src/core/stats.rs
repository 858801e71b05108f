//! Order statistics and small sample-moment helpers.
//!
//! Conventions used throughout the crate:
//! - quantiles are order statistics of rank `ceil(m * alpha)` counted from
//!   the smallest value;
//! - the median of an even-length sample is the lower-middle order statistic;
//! - MAD is the plain median of absolute deviations from the median, with no
//!   normal-consistency factor.

use crate::error::{Error, Result};

pub fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("tried to sort a NaN"));
    v
}

/// Rank `ceil(m * alpha)` from the smallest, on an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], alpha: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("quantile of empty sample".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("quantile level {alpha}")));
    }
    let m = sorted.len();
    let rank = ((m as f64 * alpha).ceil() as usize).clamp(1, m);
    Ok(sorted[rank - 1])
}

pub fn quantile(values: &[f64], alpha: f64) -> Result<f64> {
    quantile_sorted(&sorted_copy(values), alpha)
}

/// Weighted quantile: smallest value whose cumulative normalized weight
/// reaches `alpha`. Reduces to `quantile` for equal weights.
pub fn weighted_quantile(values: &[f64], weights: &[f64], alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("weighted quantile of empty sample".into()));
    }
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
            context: "weighted quantile".into(),
        });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateSample("all weights zero".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN value"));
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i] / total;
        if cum >= alpha - 1e-12 {
            return Ok(values[i]);
        }
    }
    Ok(values[*order.last().unwrap()])
}

/// Lower-middle median: order statistic of rank `ceil(n/2)`.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("median of empty sample".into()));
    }
    let sorted = sorted_copy(values);
    let n = sorted.len();
    Ok(sorted[n.div_ceil(2) - 1])
}

/// Median absolute deviation about the median, unscaled.
pub fn mad(values: &[f64]) -> Result<f64> {
    let m = median(values)?;
    let devs: Vec<f64> = values.iter().map(|x| (x - m).abs()).collect();
    median(&devs)
}

pub fn interquartile_range(values: &[f64]) -> Result<f64> {
    let sorted = sorted_copy(values);
    Ok(quantile_sorted(&sorted, 0.75)? - quantile_sorted(&sorted, 0.25)?)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n-1 denominator.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_sd(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_t |F1(t) - F2(t)|`.
pub fn two_sample_ks(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyInput("KS statistic of empty sample".into()));
    }
    let a = sorted_copy(xs);
    let b = sorted_copy(ys);
    let (mut i, mut j) = (0usize, 0usize);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // advance both CDFs past the smallest remaining value (ties together)
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample KS critical value at the given level.
pub fn ks_critical_value(n1: usize, n2: usize, level: f64) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    c * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

/// Weighted mean and covariance of row vectors, weights as probabilities.
pub fn weighted_mean_cov(points: &[Vec<f64>], weights: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("weighted_mean_cov".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateSample("all weights zero".into()));
    }
    let k = points[0].len();
    let mut mu = vec![0.0; k];
    for (x, &w) in points.iter().zip(weights) {
        for (m, v) in mu.iter_mut().zip(x) {
            *m += w * v;
        }
    }
    for m in &mut mu {
        *m /= total;
    }
    let mut cov = vec![vec![0.0; k]; k];
    for (x, &w) in points.iter().zip(weights) {
        for r in 0..k {
            for c in 0..k {
                cov[r][c] += w * (x[r] - mu[r]) * (x[c] - mu[c]);
            }
        }
    }
    for row in &mut cov {
        for v in row {
            *v /= total;
        }
    }
    Ok((mu, cov))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_rank_convention() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(quantile(&values, 0.05).unwrap(), 5.0);
        assert_eq!(quantile(&values, 0.025).unwrap(), 3.0);
        assert_eq!(quantile(&values, 0.975).unwrap(), 98.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0], 0.5).unwrap(), 2.0);
    }

    #[test]
    fn quantile_constant_sequence() {
        let values = [4.0; 9];
        for alpha in [0.01, 0.3, 0.5, 0.99] {
            assert_eq!(quantile(&values, alpha).unwrap(), 4.0);
        }
    }

    #[test]
    fn weighted_quantile_matches_unweighted_for_unit_weights() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let weights = vec![1.0; 100];
        for alpha in [0.05, 0.33, 0.5, 0.9] {
            assert_eq!(
                weighted_quantile(&values, &weights, alpha).unwrap(),
                quantile(&values, alpha).unwrap()
            );
        }
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        // lower-middle for even n
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.0);
    }

    #[test]
    fn mad_hand_computed() {
        // median 0, |devs| {1, 0, 1}, median 1
        assert_eq!(mad(&[-1.0, 0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn median_mad_equivariance() {
        let x = [0.3, -1.2, 4.5, 2.2, -0.7, 0.0, 9.1];
        let (a, b) = (2.5, -1.7);
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let mx = median(&x).unwrap();
        let my = median(&y).unwrap();
        assert!((my - (a + b * mx)).abs() < 1e-12);
        assert!((mad(&y).unwrap() - b.abs() * mad(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ks_on_identical_samples_is_zero() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(two_sample_ks(&xs, &xs).unwrap(), 0.0);
    }

    #[test]
    fn ks_on_disjoint_samples_is_one() {
        let xs = [1.0, 2.0];
        let ys = [10.0, 11.0];
        assert_eq!(two_sample_ks(&xs, &ys).unwrap(), 1.0);
    }

    #[test]
    fn ks_critical_value_level_001() {
        // c(0.01) = sqrt(-ln(0.005)/2) ~ 1.6276
        let d = ks_critical_value(5000, 5000, 0.01);
        assert!((d - 1.6276 * (2.0f64 / 5000.0).sqrt()).abs() < 1e-4);
    }
}
