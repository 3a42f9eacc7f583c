//! Pearson correlation and the kernel-based maximal correlation indicators.
//!
//! [`hgr_kb`] maximizes the Pearson correlation between `P_a * alpha` and
//! `P_b * beta` over the centered polynomial kernels of both inputs. That is
//! the first canonical correlation of the two kernel matrices, which the
//! default solver computes in closed form by whitening each side and taking
//! the leading singular triple of the whitened cross-covariance. The
//! [`SolverMethod::Refine`] path instead iterates directly on the residual
//! form `||P_a alpha - P_b beta||^2` subject to `var(P_b beta) = 1`.
//!
//! [`hgr_sk`] keeps one side linear and solves two ordinary least-squares
//! fits (kernel of `a` onto `b`, kernel of `b` onto `a`), reporting the better.

mod cca;
mod kb;
mod refine;
mod scan;
mod sk;

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{HgrError, Result};
use crate::linalg::{lstsq, Matrix};
use crate::sample::{check_paired, SampleVector};
use crate::stats;

pub use cca::{leading_canonical_pair, CanonicalPair};
pub use kb::{hgr_kb, hgr_kb_kernels};
pub use refine::{refine_residual, RefineOutcome};
pub use scan::{degree_scan, monotonicity_violations, DegreeGrid, Violation};
pub use sk::{hgr_sk, hgr_sk_kernels};

/// Kernel degrees for the two inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeConfig {
    pub h: usize,
    pub k: usize,
}

impl DegreeConfig {
    pub fn new(h: usize, k: usize) -> Result<Self> {
        if h < 1 {
            return Err(HgrError::InvalidDegree(h));
        }
        if k < 1 {
            return Err(HgrError::InvalidDegree(k));
        }
        Ok(DegreeConfig { h, k })
    }

    pub fn swapped(self) -> Self {
        DegreeConfig {
            h: self.k,
            k: self.h,
        }
    }
}

impl Default for DegreeConfig {
    fn default() -> Self {
        DegreeConfig { h: 5, k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Closed-form whitened canonical correlation.
    #[default]
    Eigen,
    /// Projected-gradient iteration on the constrained residual problem.
    Refine,
}

/// Coefficients carried over from a previous solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Added to the diagonal of each equilibrated covariance matrix.
    pub ridge: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub warm_start: Option<WarmStart>,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ridge: 1e-9,
            tol: 1e-8,
            max_iter: 500,
            warm_start: None,
            method: SolverMethod::Eigen,
        }
    }
}

impl SolverConfig {
    pub fn refine() -> Self {
        SolverConfig {
            method: SolverMethod::Refine,
            ..SolverConfig::default()
        }
    }

    pub fn with_warm_start(mut self, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        self.warm_start = Some(WarmStart { alpha, beta });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(HgrError::InvalidConfig(
                "ridge must be finite and >= 0".to_string(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(HgrError::InvalidConfig("tol must be > 0".to_string()));
        }
        if self.max_iter < 1 {
            return Err(HgrError::InvalidConfig("max_iter must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Which side carried the polynomial kernel in a single-kernel fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Both,
    /// `b` approximated by a polynomial of `a`.
    AToB,
    /// `a` approximated by a polynomial of `b`.
    BToA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Standardized mean-squared residual `||value * f - g||^2 / n` at the
    /// returned coefficients.
    pub final_residual: f64,
    /// Singular-value condition numbers of the (equilibrated) kernels, `[a, b]`.
    pub condition_numbers: Vec<f64>,
    /// Set when a kernel is numerically rank deficient and the ridge term
    /// carried the solve.
    pub rank_deficient: bool,
    pub warm_start_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HgrResult {
    pub value: f64,
    /// Coefficients of the powers of standardized `a`, scaled to unit
    /// projection variance.
    pub alpha: Vec<f64>,
    /// Coefficients of the powers of standardized `b`, scaled to unit
    /// projection variance.
    pub beta: Vec<f64>,
    pub direction: Direction,
    pub diagnostics: Diagnostics,
}

/// Sample Pearson correlation.
pub fn pearson(a: &SampleVector, b: &SampleVector) -> Result<f64> {
    check_paired(a, b)?;
    let r = stats::correlation(a.values(), b.values()).ok_or(HgrError::ZeroVariance)?;
    Ok(r.clamp(-1.0, 1.0))
}

/// Pearson correlation obtained as the minimizer `r` of
/// `||r * std(a) - std(b)||^2 / n`, solved as a one-column least-squares
/// problem.
pub fn pearson_lstsq(a: &SampleVector, b: &SampleVector) -> Result<f64> {
    check_paired(a, b)?;
    let za = stats::standardized(a.values());
    let zb = stats::standardized(b.values());
    let design = Matrix::from_columns(&[za]);
    let r = lstsq(&design, &zb);
    Ok(r[0])
}

/// Projections of both kernels with their Pearson correlation. Used to turn
/// raw coefficient vectors into the reported, normalized form.
pub(crate) struct Normalized {
    pub value: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub residual: f64,
}

/// Rescales both coefficient vectors to unit projection variance, flips the
/// sign of `alpha` so the correlation is non-negative, and measures the
/// achieved correlation.
pub(crate) fn normalize_pair(ka: &Matrix, kb: &Matrix, alpha: &[f64], beta: &[f64]) -> Normalized {
    let mut alpha = alpha.to_vec();
    let mut beta = beta.to_vec();
    let u = ka.matvec(&alpha);
    let v = kb.matvec(&beta);
    let su = stats::std_dev(&u);
    let sv = stats::std_dev(&v);
    if su > 0.0 {
        alpha.iter_mut().for_each(|x| *x /= su);
    }
    if sv > 0.0 {
        beta.iter_mut().for_each(|x| *x /= sv);
    }
    let mut rho = stats::correlation(&u, &v).unwrap_or(0.0);
    if rho < 0.0 {
        alpha.iter_mut().for_each(|x| *x = -*x);
        rho = -rho;
    }
    let value = rho.clamp(0.0, 1.0);
    let f = ka.matvec(&alpha);
    let g = kb.matvec(&beta);
    let residual = standardized_residual(&f, &g, value);
    Normalized {
        value,
        alpha,
        beta,
        residual,
    }
}

/// `||r * std(f) - std(g)||^2 / n`, zero-variance inputs contribute as zeros.
pub fn standardized_residual(f: &[f64], g: &[f64], r: f64) -> f64 {
    let fs = standardize_or_zero(f);
    let gs = standardize_or_zero(g);
    fs.iter()
        .zip(&gs)
        .map(|(x, y)| (r * x - y) * (r * x - y))
        .sum::<f64>()
        / f.len().max(1) as f64
}

fn standardize_or_zero(x: &[f64]) -> Vec<f64> {
    let sd = stats::std_dev(x);
    if sd > 0.0 {
        stats::standardized(x)
    } else {
        vec![0.0; x.len()]
    }
}

pub(crate) fn pad(v: &[f64], len: usize) -> Option<Vec<f64>> {
    if v.len() > len {
        return None;
    }
    let mut out = v.to_vec();
    out.resize(len, 0.0);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SampleVector {
        SampleVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pearson_examples() {
        assert!(
            (pearson(&sv(&[1.0, 2.0, 3.0]), &sv(&[2.0, 4.0, 6.0])).unwrap() - 1.0).abs() < 1e-15
        );
        assert!(
            (pearson(&sv(&[1.0, 2.0, 3.0]), &sv(&[6.0, 4.0, 2.0])).unwrap() + 1.0).abs() < 1e-15
        );
        assert!(
            (pearson(&sv(&[1.0, 2.0, 3.0]), &sv(&[1.0, 3.0, 2.0])).unwrap() - 0.5).abs() < 1e-15
        );
    }

    #[test]
    fn pearson_length_mismatch() {
        assert!(matches!(
            pearson(&sv(&[1.0, 2.0, 3.0]), &sv(&[1.0, 2.0, 3.0, 5.0])),
            Err(HgrError::LengthMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn pearson_lstsq_examples() {
        let a = sv(&[0.0, 1.0, 2.0, 3.0]);
        let b = sv(&[1.0, 0.0, 3.0, 2.0]);
        assert!((pearson_lstsq(&a, &b).unwrap() - 0.6).abs() < 1e-12);
        assert!((pearson_lstsq(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solver_config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            ridge: -1.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iter: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(DegreeConfig::new(0, 2).is_err());
    }
}
