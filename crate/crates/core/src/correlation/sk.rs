use alloc::vec;
use alloc::vec::Vec;

use super::{normalize_pair, Diagnostics, Direction, HgrResult, SolverConfig};
use crate::error::{HgrError, Result};
use crate::kernelspace::{expand, KernelMatrix};
use crate::linalg::{lstsq_ridge, Matrix};
use crate::sample::{check_paired, SampleVector};

/// Directions whose values differ by less than this are reported as `AToB`.
const DIRECTION_TIE: f64 = 1e-12;

/// Single-kernel maximal correlation: the better of the two least-squares fits
/// "polynomial of `a` onto standardized `b`" and "polynomial of `b` onto
/// standardized `a`", both with degree `d`.
pub fn hgr_sk(
    a: &SampleVector,
    b: &SampleVector,
    d: usize,
    cfg: &SolverConfig,
) -> Result<HgrResult> {
    cfg.validate()?;
    if d < 1 {
        return Err(HgrError::InvalidDegree(d));
    }
    check_paired(a, b)?;
    if a.len() < d + 1 {
        return Err(HgrError::TooFewObservations {
            required: d + 1,
            found: a.len(),
        });
    }
    let ka = expand(a, d)?;
    let kb = expand(b, d)?;
    let la = expand(a, 1)?;
    let lb = expand(b, 1)?;
    hgr_sk_kernels(&ka, &kb, &la, &lb, cfg)
}

struct Fit {
    value: f64,
    poly: Vec<f64>,
    residual: f64,
}

fn fit(poly: &Matrix, linear: &Matrix, ridge: f64) -> Fit {
    let target = linear.column(0);
    let coef = lstsq_ridge(poly, &target, ridge);
    let norm = normalize_pair(poly, linear, &coef, &[1.0]);
    Fit {
        value: norm.value,
        poly: norm.alpha,
        residual: norm.residual,
    }
}

/// [`hgr_sk`] on pre-built kernels: degree-`d` kernels `ka`, `kb` and the
/// degree-1 kernels `la`, `lb` of the same inputs.
pub fn hgr_sk_kernels(
    ka: &KernelMatrix,
    kb: &KernelMatrix,
    la: &KernelMatrix,
    lb: &KernelMatrix,
    cfg: &SolverConfig,
) -> Result<HgrResult> {
    cfg.validate()?;
    if ka.len() != kb.len() {
        return Err(HgrError::LengthMismatch {
            left: ka.len(),
            right: kb.len(),
        });
    }
    let a_to_b = fit(ka.centered(), lb.centered(), cfg.ridge);
    let b_to_a = fit(kb.centered(), la.centered(), cfg.ridge);
    let conditions = vec![ka.condition_number(), kb.condition_number()];

    let (direction, win) = if b_to_a.value > a_to_b.value + DIRECTION_TIE {
        (Direction::BToA, b_to_a)
    } else {
        (Direction::AToB, a_to_b)
    };
    let rank_deficient = conditions.iter().any(|c| !c.is_finite() || *c > 1e12);
    let (alpha, beta) = match direction {
        Direction::BToA => (vec![1.0], win.poly),
        _ => (win.poly, vec![1.0]),
    };
    Ok(HgrResult {
        value: win.value,
        alpha,
        beta,
        direction,
        diagnostics: Diagnostics {
            iterations: 0,
            final_residual: win.residual,
            condition_numbers: conditions,
            rank_deficient,
            warm_start_used: false,
        },
    })
}
