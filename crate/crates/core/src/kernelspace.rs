//! Polynomial feature expansions of a single sample vector.
//!
//! Column `j` (1-based) of the expansion holds the `j`-th elementwise power of
//! the source. [`expand`] standardizes the source first (zero mean, unit
//! variance), which leaves the centered column space unchanged while keeping
//! high powers in a sane numeric range. Column means are retained so the same
//! centering can be applied to held-out points with [`KernelMatrix::transform`].

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{HgrError, Result};
use crate::linalg::{sym_eigen, Matrix};
use crate::sample::SampleVector;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    raw: Matrix,
    centered: Matrix,
    column_means: Vec<f64>,
    degree: usize,
    source_mean: f64,
    source_std: f64,
    standardized: bool,
}

/// Standardizes `x` and expands it into powers `1..=degree`.
pub fn expand(x: &SampleVector, degree: usize) -> Result<KernelMatrix> {
    if degree < 1 {
        return Err(HgrError::InvalidDegree(degree));
    }
    let mean = x.mean();
    let sd = x.std_dev();
    if !(sd > 0.0) {
        return Err(HgrError::ZeroVariance);
    }
    let z: Vec<f64> = x.values().iter().map(|v| (v - mean) / sd).collect();
    Ok(build(&z, degree, mean, sd, true))
}

/// Expands `x` into powers without standardizing it first.
pub fn expand_raw(x: &[f64], degree: usize) -> Result<KernelMatrix> {
    if degree < 1 {
        return Err(HgrError::InvalidDegree(degree));
    }
    if x.is_empty() {
        return Err(HgrError::TooFewObservations {
            required: 1,
            found: 0,
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(HgrError::NonFinite { index });
    }
    let sd = stats::std_dev(x);
    if !(sd > 0.0) {
        return Err(HgrError::ZeroVariance);
    }
    Ok(build(x, degree, stats::mean(x), sd, false))
}

fn powers(z: &[f64], degree: usize) -> Matrix {
    let n = z.len();
    let mut raw = Matrix::zeros(n, degree);
    for (i, &zi) in z.iter().enumerate() {
        let row = raw.row_mut(i);
        let mut p = zi;
        row[0] = p;
        for slot in row.iter_mut().skip(1) {
            p *= zi;
            *slot = p;
        }
    }
    raw
}

fn build(
    z: &[f64],
    degree: usize,
    source_mean: f64,
    source_std: f64,
    standardized: bool,
) -> KernelMatrix {
    let n = z.len();
    let raw = powers(z, degree);
    let column_means: Vec<f64> = (0..degree)
        .map(|j| (0..n).map(|i| raw[(i, j)]).sum::<f64>() / n as f64)
        .collect();
    let mut centered = raw.clone();
    for i in 0..n {
        for (v, m) in centered.row_mut(i).iter_mut().zip(&column_means) {
            *v -= m;
        }
    }
    KernelMatrix {
        raw,
        centered,
        column_means,
        degree,
        source_mean,
        source_std,
        standardized,
    }
}

/// `K.centered * omega`.
pub fn project(kernel: &KernelMatrix, omega: &[f64]) -> Result<Vec<f64>> {
    if omega.len() != kernel.degree {
        return Err(HgrError::DimensionMismatch {
            expected: kernel.degree,
            found: omega.len(),
        });
    }
    Ok(kernel.centered.matvec(omega))
}

impl KernelMatrix {
    pub fn raw(&self) -> &Matrix {
        &self.raw
    }

    pub fn centered(&self) -> &Matrix {
        &self.centered
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.raw.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.rows() == 0
    }

    pub fn source_mean(&self) -> f64 {
        self.source_mean
    }

    pub fn source_std(&self) -> f64 {
        self.source_std
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Expands new points with the training standardization and column
    /// means, giving rows comparable with [`KernelMatrix::centered`].
    pub fn transform(&self, values: &[f64]) -> Matrix {
        let z: Vec<f64> = if self.standardized {
            values
                .iter()
                .map(|v| (v - self.source_mean) / self.source_std)
                .collect()
        } else {
            values.to_vec()
        };
        let mut m = powers(&z, self.degree);
        for i in 0..m.rows() {
            for (v, mu) in m.row_mut(i).iter_mut().zip(&self.column_means) {
                *v -= mu;
            }
        }
        m
    }

    /// Out-of-sample projection `transform(values) * omega`.
    pub fn project_new(&self, values: &[f64], omega: &[f64]) -> Result<Vec<f64>> {
        if omega.len() != self.degree {
            return Err(HgrError::DimensionMismatch {
                expected: self.degree,
                found: omega.len(),
            });
        }
        Ok(self.transform(values).matvec(omega))
    }

    /// Ratio of the largest to the smallest singular value of the centered
    /// matrix (infinite when numerically singular).
    pub fn condition_number(&self) -> f64 {
        let gram = self.centered.cross(&self.centered, self.len() as f64);
        let eig = sym_eigen(&gram);
        let max = eig.values.first().copied().unwrap_or(0.0);
        let min = eig.values.last().copied().unwrap_or(0.0);
        if !(min > 0.0) || !(max > 0.0) {
            return f64::INFINITY;
        }
        libm::sqrt(max / min)
    }

    /// Column sums of the centered matrix (all zero up to rounding).
    pub fn centered_column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.degree];
        for i in 0..self.len() {
            for (s, v) in sums.iter_mut().zip(self.centered.row(i)) {
                *s += v;
            }
        }
        sums
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lstsq_ridge;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn raw_example() {
        let k = expand_raw(&[1.0, 2.0], 2).unwrap();
        assert_eq!(k.raw().as_slice(), &[1.0, 1.0, 2.0, 4.0]);
        assert_eq!(k.centered().as_slice(), &[-0.5, -1.5, 0.5, 1.5]);
        assert_eq!(k.column_means(), &[1.5, 2.5]);
    }

    #[test]
    fn constant_input_is_rejected() {
        assert_eq!(expand_raw(&[3.0, 3.0, 3.0], 4), Err(HgrError::ZeroVariance));
        assert!(SampleVector::new(vec![3.0; 3]).is_err());
    }

    #[test]
    fn zero_degree_is_rejected() {
        let x = SampleVector::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(expand(&x, 0), Err(HgrError::InvalidDegree(0)));
    }

    #[test]
    fn raw_columns_are_powers_of_standardized_input() {
        let x = SampleVector::new(vec![-1.0, 0.5, 2.0, 3.0]).unwrap();
        let k = expand(&x, 3).unwrap();
        let z = stats::standardized(x.values());
        for (i, zi) in z.iter().enumerate() {
            for j in 0..3 {
                let expect = libm::pow(*zi, (j + 1) as f64);
                assert!((k.raw()[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn project_basis_and_zero() {
        let x = SampleVector::new(vec![0.1, 0.7, -0.3, 1.2, 0.9]).unwrap();
        let k = expand(&x, 3).unwrap();
        assert!(project(&k, &[0.0; 3]).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(
            project(&k, &[1.0, 0.0, 0.0]).unwrap(),
            k.centered().column(0)
        );
        let w = [0.3, -1.1, 0.25];
        let w2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        let p1 = project(&k, &w).unwrap();
        let p2 = project(&k, &w2).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        assert!(matches!(
            project(&k, &[1.0]),
            Err(HgrError::DimensionMismatch {
                expected: 3,
                found: 1
            })
        ));
    }

    #[test]
    fn transform_reproduces_training_rows() {
        let x = SampleVector::new(vec![0.1, 0.7, -0.3, 1.2, 0.9]).unwrap();
        let k = expand(&x, 4).unwrap();
        assert_eq!(&k.transform(x.values()), k.centered());
    }

    #[test]
    fn condition_number_finite_up_to_degree_eight() {
        let x: Vec<f64> = (0..200)
            .map(|i| libm::sin(i as f64 * 0.37) * 3.0 + 1.0)
            .collect();
        let x = SampleVector::new(x).unwrap();
        for d in 1..=8 {
            let c = expand(&x, d).unwrap().condition_number();
            assert!(c.is_finite() && c >= 1.0, "degree {d}: {c}");
        }
    }

    fn lcg_uniform(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn centering_identity_uniform_degree_five() {
        let x = SampleVector::new(lcg_uniform(11, 200)).unwrap();
        let k = expand(&x, 5).unwrap();
        for s in k.centered_column_sums() {
            assert!(s.abs() <= 1e-9 * 200.0, "{s}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn affine_map_preserves_centered_span(
            seed in 0u64..10_000,
            d in 1usize..=6,
            scale in prop_oneof![-3.0f64..-0.5, 0.5f64..3.0],
            shift in -3.0f64..3.0,
            standardize in any::<bool>(),
        ) {
            let n = 60;
            let x = lcg_uniform(seed, n);
            let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
            let (kx, ky) = if standardize {
                (
                    expand(&SampleVector::new(x).unwrap(), d).unwrap(),
                    expand(&SampleVector::new(y).unwrap(), d).unwrap(),
                )
            } else {
                (expand_raw(&x, d).unwrap(), expand_raw(&y, d).unwrap())
            };
            for j in 0..d {
                let col = kx.centered().column(j);
                let coef = lstsq_ridge(ky.centered(), &col, 0.0);
                let fit = ky.centered().matvec(&coef);
                let resid = libm::sqrt(col.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
                let norm = libm::sqrt(col.iter().map(|a| a * a).sum::<f64>()).max(1.0);
                prop_assert!(resid / norm <= 1e-8, "col {} residual {}", j, resid);
            }
        }
    }
}
