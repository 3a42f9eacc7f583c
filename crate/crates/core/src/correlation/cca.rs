//! Whitened canonical correlation between two centered column sets.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{sym_eigen, Matrix};

/// Relative eigenvalue floor below which a covariance is flagged as rank
/// deficient.
const RANK_TOL: f64 = 1e-12;
/// Relative gap under which two leading singular values are treated as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CanonicalPair {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Leading singular value of the whitened cross-covariance.
    pub correlation: f64,
    pub condition_a: f64,
    pub condition_b: f64,
    pub rank_deficient: bool,
}

struct Whitener {
    /// Maps whitened coordinates back to kernel coefficients.
    transform: Matrix,
    condition: f64,
    rank_deficient: bool,
}

fn whitener(cov: &Matrix, ridge: f64) -> Whitener {
    let p = cov.rows();
    let mut rank_deficient = false;
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let d = cov[(j, j)];
            if d > 0.0 {
                libm::sqrt(d)
            } else {
                rank_deficient = true;
                1.0
            }
        })
        .collect();
    let mut s = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            s[(i, j)] = cov[(i, j)] / (scale[i] * scale[j]);
        }
    }
    let eig = sym_eigen(&s);
    let max = eig.values[0];
    let min = eig.values[p - 1];
    if !(min > RANK_TOL * max) {
        rank_deficient = true;
    }
    let condition = if min > 0.0 && max > 0.0 {
        libm::sqrt(max / min)
    } else {
        f64::INFINITY
    };
    let shift = ridge * s.trace() / p as f64;
    let floor = 1e-14 * max.max(0.0);
    let inv_sqrt: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| {
            let l = l + shift;
            if l > floor && l > 0.0 {
                1.0 / libm::sqrt(l)
            } else {
                0.0
            }
        })
        .collect();
    // transform = D^{-1/2} V diag(inv_sqrt) V^T
    let v = &eig.vectors;
    let mut t = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for k in 0..p {
                acc += v[(i, k)] * inv_sqrt[k] * v[(j, k)];
            }
            t[(i, j)] = acc / scale[i];
        }
    }
    Whitener {
        transform: t,
        condition,
        rank_deficient,
    }
}

/// Leading canonical pair of two centered matrices with the same row count.
///
/// Each covariance is equilibrated to unit diagonal, stabilized with
/// `ridge * trace / dim` on the diagonal and whitened by its symmetric inverse
/// square root; the leading singular triple of the whitened cross-covariance
/// is mapped back to coefficient space.
pub fn leading_canonical_pair(a: &Matrix, b: &Matrix, ridge: f64) -> CanonicalPair {
    let n = a.rows() as f64;
    let caa = a.cross(a, n);
    let cbb = b.cross(b, n);
    let cab = a.cross(b, n);
    let wa = whitener(&caa, ridge);
    let wb = whitener(&cbb, ridge);
    let m = wa.transform.transpose().matmul(&cab).matmul(&wb.transform);
    let p = m.rows();
    let q = m.cols();

    // candidate singular pairs (u, v, s) in whitened space
    let mut candidates: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    if p <= q {
        let g = m.matmul(&m.transpose());
        let eig = sym_eigen(&g);
        let top = eig.values[0].max(0.0);
        for (i, &l) in eig.values.iter().enumerate() {
            if i > 0 && !(top > 0.0 && l >= top * (1.0 - TIE_TOL)) {
                break;
            }
            let u = eig.vectors.column(i);
            let s = libm::sqrt(l.max(0.0));
            let v = if s > 0.0 {
                m.tr_matvec(&u).into_iter().map(|x| x / s).collect()
            } else {
                unit(q)
            };
            candidates.push((u, v, s));
        }
    } else {
        let g = m.transpose().matmul(&m);
        let eig = sym_eigen(&g);
        let top = eig.values[0].max(0.0);
        for (i, &l) in eig.values.iter().enumerate() {
            if i > 0 && !(top > 0.0 && l >= top * (1.0 - TIE_TOL)) {
                break;
            }
            let v = eig.vectors.column(i);
            let s = libm::sqrt(l.max(0.0));
            let u = if s > 0.0 {
                m.matvec(&v).into_iter().map(|x| x / s).collect()
            } else {
                unit(p)
            };
            candidates.push((u, v, s));
        }
    }

    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for (u, v, s) in candidates {
        let mut alpha = wa.transform.matvec(&u);
        let mut beta = wb.transform.matvec(&v);
        if leading_sign(&beta) < 0.0 {
            alpha.iter_mut().for_each(|x| *x = -*x);
            beta.iter_mut().for_each(|x| *x = -*x);
        }
        let replace = match &best {
            None => true,
            Some((ba, _, _)) => lexicographically_greater(&alpha, ba),
        };
        if replace {
            best = Some((alpha, beta, s));
        }
    }
    let (alpha, beta, correlation) = best.expect("at least one candidate");
    CanonicalPair {
        alpha,
        beta,
        correlation,
        condition_a: wa.condition,
        condition_b: wb.condition,
        rank_deficient: wa.rank_deficient || wb.rank_deficient,
    }
}

fn unit(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

/// Sign of the first entry that is not negligible relative to the largest.
fn leading_sign(x: &[f64]) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter()
        .find(|v| v.abs() > 1e-12 * max)
        .map_or(1.0, |v| v.signum())
}

fn lexicographically_greater(x: &[f64], y: &[f64]) -> bool {
    for (a, b) in x.iter().zip(y) {
        if a != b {
            return a > b;
        }
    }
    false
}
