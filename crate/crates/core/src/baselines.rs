//! Randomized Dependence Coefficient.
//!
//! Both inputs are mapped to their empirical copula (ranks scaled to
//! `(0, 1]`), augmented with a constant, projected through random Gaussian
//! weights and passed through `sin`. The reported value is the largest
//! canonical correlation between the two feature sets.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::correlation::{leading_canonical_pair, normalize_pair};
use crate::error::{HgrError, Result};
use crate::linalg::Matrix;
use crate::sample::{check_paired, SampleVector};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdcConfig {
    pub n_projections: usize,
    pub scale: f64,
    pub seed: u64,
    /// Ridge for the canonical correlation step.
    pub ridge: f64,
}

impl RdcConfig {
    pub fn with_seed(seed: u64) -> Self {
        RdcConfig {
            n_projections: 20,
            scale: 1.0 / 6.0,
            seed,
            ridge: 1e-9,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_projections < 1 {
            return Err(HgrError::InvalidConfig("n_projections must be >= 1".into()));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(HgrError::InvalidConfig("scale must be positive".into()));
        }
        Ok(())
    }
}

/// Empirical copula: average ranks (1-based) divided by `n`.
pub fn copula(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = alloc::vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end share the average rank
        let avg = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg / n as f64;
        }
        start = end;
    }
    ranks
}

fn features(u: &[f64], cfg: &RdcConfig, rng: &mut ChaCha8Rng) -> Matrix {
    let k = cfg.n_projections;
    // augmented input [u, 1] has two columns
    let amp = cfg.scale / 2.0;
    let w: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            let w0: f64 = StandardNormal.sample(rng);
            let w1: f64 = StandardNormal.sample(rng);
            (amp * w0, amp * w1)
        })
        .collect();
    let n = u.len();
    let mut m = Matrix::zeros(n, k);
    for (i, ui) in u.iter().enumerate() {
        for (j, (w0, w1)) in w.iter().enumerate() {
            m[(i, j)] = libm::sin(ui * w0 + w1);
        }
    }
    for j in 0..k {
        let mean = stats::mean(&m.column(j));
        for i in 0..n {
            m[(i, j)] -= mean;
        }
    }
    m
}

pub fn rdc(a: &SampleVector, b: &SampleVector, cfg: &RdcConfig) -> Result<f64> {
    cfg.validate()?;
    check_paired(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fa = features(&copula(a.values()), cfg, &mut rng);
    let fb = features(&copula(b.values()), cfg, &mut rng);
    let pair = leading_canonical_pair(&fa, &fb, cfg.ridge);
    let norm = normalize_pair(&fa, &fb, &pair.alpha, &pair.beta);
    Ok(norm.value)
}
