//! Dense linear algebra for the small matrices this crate works with
//! (kernel degrees rarely exceed ten). Every routine runs a fixed loop
//! order so results are bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Matrix { rows, cols, data }
    }

    /// Builds an `n x columns.len()` matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged columns");
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^T * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// `self^T * other / scale`, the cross-moment matrix of two column sets.
    pub fn cross(&self, other: &Matrix, scale: f64) -> Matrix {
        assert_eq!(self.rows, other.rows, "cross shape mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let b = other.row(i);
            for (p, ap) in a.iter().enumerate() {
                let dst = out.row_mut(p);
                for (d, bq) in dst.iter_mut().zip(b) {
                    *d += ap * bq;
                }
            }
        }
        for v in out.data.iter_mut() {
            *v /= scale;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in non-increasing order.
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, matching `values`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigen-decomposition. Only the upper triangle's symmetric
/// counterpart is assumed; the input is symmetrized first.
pub fn sym_eigen(a: &Matrix) -> SymEigen {
    assert_eq!(a.rows, a.cols, "sym_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = Matrix::identity(n);
    let total: f64 = m.data.iter().map(|x| x * x).sum();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off == 0.0 || off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order among exact ties
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    SymEigen { values, vectors }
}

/// Least-squares solution of `min ||A x - y||` by Householder QR.
///
/// Columns whose triangular pivot falls below `1e-13 * max pivot` are treated
/// as dependent and get a zero coefficient.
pub fn lstsq(a: &Matrix, y: &[f64]) -> Vec<f64> {
    let m = a.rows;
    let n = a.cols;
    assert_eq!(m, y.len(), "lstsq shape mismatch");
    assert!(m >= n, "lstsq needs at least as many rows as columns");
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = y.to_vec();

    for j in 0..n {
        let norm = libm::sqrt(cols[j][j..].iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if cols[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(j) {
            let proj: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * proj / vnorm2;
            for (c, vi) in col[j..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let proj: f64 = v.iter().zip(&rhs[j..]).map(|(a, b)| a * b).sum();
        let f = 2.0 * proj / vnorm2;
        for (r, vi) in rhs[j..].iter_mut().zip(&v) {
            *r -= f * vi;
        }
    }

    let max_pivot = (0..n).map(|j| cols[j][j].abs()).fold(0.0, f64::max);
    let tol = 1e-13 * max_pivot;
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let pivot = cols[j][j];
        if pivot.abs() <= tol || pivot == 0.0 {
            x[j] = 0.0;
            continue;
        }
        let mut s = rhs[j];
        for k in (j + 1)..n {
            s -= cols[k][j] * x[k];
        }
        x[j] = s / pivot;
    }
    x
}

/// Ridge-regularized least squares on equilibrated columns:
/// `min ||A_s x - y||^2 + ridge * ||x||^2` where `A_s` has unit-norm columns,
/// mapped back to the original column scaling.
pub fn lstsq_ridge(a: &Matrix, y: &[f64], ridge: f64) -> Vec<f64> {
    let m = a.rows;
    let n = a.cols;
    let scales: Vec<f64> = (0..n)
        .map(|j| {
            let s = libm::sqrt((0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>());
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let extra = if ridge > 0.0 { n } else { 0 };
    let mut aug = Matrix::zeros(m + extra, n);
    for i in 0..m {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)] / scales[j];
        }
    }
    let mut rhs = y.to_vec();
    if extra > 0 {
        let r = libm::sqrt(ridge);
        for j in 0..n {
            aug[(m + j, j)] = r;
        }
        rhs.extend(core::iter::repeat_n(0.0, n));
    }
    let x = lstsq(&aug, &rhs);
    x.iter().zip(&scales).map(|(v, s)| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = Matrix::from_row_major(3, 3, vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 5.0]);
        let e = sym_eigen(&a);
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3)
                    .map(|k| e.vectors[(i, k)] * e.values[k] * e.vectors[(j, k)])
                    .sum();
                assert!((r - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_diagonal_input_is_untouched() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 3.0]);
        let e = sym_eigen(&a);
        assert_eq!(e.values, vec![3.0, 1.0]);
    }

    #[test]
    fn lstsq_exact_system() {
        // y = 2 x0 - x1
        let a = Matrix::from_row_major(4, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0]);
        let y = [2.0, -1.0, 1.0, 3.0];
        let x = lstsq(&a, &y);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_dependent_column_gets_zero() {
        let a = Matrix::from_row_major(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let x = lstsq(&a, &[1.0, 2.0, 3.0]);
        let fit: Vec<f64> = a.matvec(&x);
        for (f, y) in fit.iter().zip([1.0, 2.0, 3.0]) {
            assert!((f - y).abs() < 1e-10);
        }
    }

    #[test]
    fn cross_matches_matmul() {
        let a = Matrix::from_row_major(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Matrix::from_row_major(3, 1, vec![1.0, 0.0, -1.0]);
        let c = a.cross(&b, 1.0);
        let d = a.transpose().matmul(&b);
        assert_eq!(c, d);
    }
}
