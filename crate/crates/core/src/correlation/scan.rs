use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{hgr_kb_kernels, HgrResult, SolverConfig, WarmStart};
use crate::error::{HgrError, Result};
use crate::kernelspace::expand;
use crate::sample::{check_paired, SampleVector};
use crate::Clock;

/// `HGR-KB` over every degree pair `(h, k)` with `1 <= h <= h_max`,
/// `1 <= k <= k_max`. `values[h - 1][k - 1]` holds the cell for `(h, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeGrid {
    pub values: Vec<Vec<f64>>,
    pub cells: Vec<Vec<HgrResult>>,
    /// Seconds spent per cell, as reported by the supplied clock.
    pub cell_seconds: Vec<Vec<f64>>,
    pub violations: Vec<Violation>,
}

/// A pair of cells breaking degree monotonicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub lower: (usize, usize),
    pub higher: (usize, usize),
    pub deficit: f64,
}

/// Computes the degree grid. Each cell is warm-started from the better of its
/// already computed neighbours `(h - 1, k)` and `(h, k - 1)`.
pub fn degree_scan(
    a: &SampleVector,
    b: &SampleVector,
    h_max: usize,
    k_max: usize,
    cfg: &SolverConfig,
    clock: &dyn Clock,
) -> Result<DegreeGrid> {
    if h_max < 1 {
        return Err(HgrError::InvalidDegree(h_max));
    }
    if k_max < 1 {
        return Err(HgrError::InvalidDegree(k_max));
    }
    check_paired(a, b)?;
    let need = h_max.max(k_max) + 1;
    if a.len() < need {
        return Err(HgrError::TooFewObservations {
            required: need,
            found: a.len(),
        });
    }
    let kas = (1..=h_max)
        .map(|h| expand(a, h))
        .collect::<Result<Vec<_>>>()?;
    let kbs = (1..=k_max)
        .map(|k| expand(b, k))
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<Vec<HgrResult>> = Vec::with_capacity(h_max);
    let mut seconds: Vec<Vec<f64>> = Vec::with_capacity(h_max);
    for hi in 0..h_max {
        let mut row: Vec<HgrResult> = Vec::with_capacity(k_max);
        let mut row_secs = Vec::with_capacity(k_max);
        for ki in 0..k_max {
            let up = if hi > 0 {
                Some(&cells[hi - 1][ki])
            } else {
                None
            };
            let left = row.last();
            let seed = match (up, left) {
                (Some(u), Some(l)) => Some(if l.value > u.value { l } else { u }),
                (u, l) => u.or(l),
            };
            let mut cell_cfg = cfg.clone();
            if let Some(s) = seed {
                cell_cfg.warm_start = Some(WarmStart {
                    alpha: s.alpha.clone(),
                    beta: s.beta.clone(),
                });
            }
            let start = clock.now_secs();
            let res = hgr_kb_kernels(&kas[hi], &kbs[ki], &cell_cfg)?;
            row_secs.push(clock.now_secs() - start);
            row.push(res);
        }
        cells.push(row);
        seconds.push(row_secs);
    }
    let values: Vec<Vec<f64>> = cells
        .iter()
        .map(|r| r.iter().map(|c| c.value).collect())
        .collect();
    let violations = monotonicity_violations(&values, 1e-6);
    Ok(DegreeGrid {
        values,
        cells,
        cell_seconds: seconds,
        violations,
    })
}

/// All cell pairs with `h' >= h`, `k' >= k` where the higher cell falls more
/// than `slack` below the lower one. Degrees in the result are 1-based.
pub fn monotonicity_violations(values: &[Vec<f64>], slack: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for (h, row) in values.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            for (h2, row2) in values.iter().enumerate().skip(h) {
                for (k2, &v2) in row2.iter().enumerate().skip(k) {
                    if v2 < v - slack {
                        out.push(Violation {
                            lower: (h + 1, k + 1),
                            higher: (h2 + 1, k2 + 1),
                            deficit: v - v2,
                        });
                    }
                }
            }
        }
    }
    out
}
