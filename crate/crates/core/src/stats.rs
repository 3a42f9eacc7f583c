//! Small descriptive statistics over slices. Variances use the population
//! (1/n) normalization throughout the crate.

use alloc::vec::Vec;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    libm::sqrt(variance(x))
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn centered(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    x.iter().map(|v| v - m).collect()
}

pub fn standardized(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    let s = std_dev(x);
    x.iter().map(|v| (v - m) / s).collect()
}

/// Pearson correlation of two equal-length slices. Returns `None` when either
/// side has zero variance.
pub fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let xc = centered(x);
    let yc = centered(y);
    let sxx = dot(&xc, &xc);
    let syy = dot(&yc, &yc);
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(dot(&xc, &yc) / libm::sqrt(sxx * syy))
}

/// Mean and population standard deviation of a list of values; `(0, 0)` for
/// an empty list. Accumulates offsets from the first value, so a list of
/// identical values yields exactly that value and a zero deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let Some(&x0) = values.first() else {
        return (0.0, 0.0);
    };
    let offsets: Vec<f64> = values.iter().map(|x| x - x0).collect();
    let shift = mean(&offsets);
    (x0 + shift, std_dev(&offsets))
}

/// Median of a slice (average of the two middle values for even lengths).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

#[cfg(test)]
mod tests {

    #[test]
    fn identical_values_have_zero_spread() {
        let v = alloc::vec![0.1 + 0.2; 30];
        assert_eq!(mean_std(&v), (0.1 + 0.2, 0.0));
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }

    use super::*;

    #[test]
    fn correlation_of_constant_is_none() {
        assert!(correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
