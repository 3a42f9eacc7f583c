use alloc::vec;
use alloc::vec::Vec;

use super::cca::leading_canonical_pair;
use super::refine::refine_residual;
use super::{
    normalize_pair, pad, DegreeConfig, Diagnostics, Direction, HgrResult, SolverConfig,
    SolverMethod,
};
use crate::error::{HgrError, Result};
use crate::kernelspace::{expand, KernelMatrix};
use crate::sample::{check_paired, SampleVector};

/// Kernel-based maximal correlation between `a` and `b` with polynomial
/// degrees `deg.h` and `deg.k`.
pub fn hgr_kb(
    a: &SampleVector,
    b: &SampleVector,
    deg: DegreeConfig,
    cfg: &SolverConfig,
) -> Result<HgrResult> {
    cfg.validate()?;
    let deg = DegreeConfig::new(deg.h, deg.k)?;
    check_paired(a, b)?;
    let n = a.len();
    let need = deg.h.max(deg.k) + 1;
    if n < need {
        return Err(HgrError::TooFewObservations {
            required: need,
            found: n,
        });
    }
    let ka = expand(a, deg.h)?;
    let kb = expand(b, deg.k)?;
    hgr_kb_kernels(&ka, &kb, cfg)
}

/// Same as [`hgr_kb`] on pre-built kernels.
pub fn hgr_kb_kernels(
    ka: &KernelMatrix,
    kb: &KernelMatrix,
    cfg: &SolverConfig,
) -> Result<HgrResult> {
    cfg.validate()?;
    if ka.len() != kb.len() {
        return Err(HgrError::LengthMismatch {
            left: ka.len(),
            right: kb.len(),
        });
    }
    let a = ka.centered();
    let b = kb.centered();
    let warm = cfg
        .warm_start
        .as_ref()
        .and_then(|w| Some((pad(&w.alpha, ka.degree())?, pad(&w.beta, kb.degree())?)))
        .filter(|(wa, wb)| wa.iter().chain(wb).all(|v| v.is_finite()));

    let (mut best, iterations, conditions, rank_deficient) = match cfg.method {
        SolverMethod::Eigen => {
            let pair = leading_canonical_pair(a, b, cfg.ridge);
            let norm = normalize_pair(a, b, &pair.alpha, &pair.beta);
            (
                norm,
                0,
                vec![pair.condition_a, pair.condition_b],
                pair.rank_deficient,
            )
        }
        SolverMethod::Refine => {
            let (alpha0, beta0) = warm
                .clone()
                .unwrap_or_else(|| (unit(ka.degree()), unit(kb.degree())));
            let out = refine_residual(a, b, &alpha0, &beta0, cfg.tol, cfg.max_iter);
            let norm = normalize_pair(a, b, &out.alpha, &out.beta);
            (
                norm,
                out.iterations,
                vec![ka.condition_number(), kb.condition_number()],
                false,
            )
        }
    };

    let mut warm_start_used = matches!(cfg.method, SolverMethod::Refine) && warm.is_some();
    if let (SolverMethod::Eigen, Some((wa, wb))) = (cfg.method, warm) {
        let candidate = normalize_pair(a, b, &wa, &wb);
        if candidate.value > best.value {
            best = candidate;
            warm_start_used = true;
        }
    }

    Ok(HgrResult {
        value: best.value,
        alpha: best.alpha,
        beta: best.beta,
        direction: Direction::Both,
        diagnostics: Diagnostics {
            iterations,
            final_residual: best.residual,
            condition_numbers: conditions,
            rank_deficient,
            warm_start_used,
        },
    })
}

fn unit(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::pearson;
    use crate::stats;

    fn sv(v: Vec<f64>) -> SampleVector {
        SampleVector::new(v).unwrap()
    }

    #[test]
    fn degree_one_is_abs_pearson() {
        let a = sv(vec![0.3, -1.2, 2.2, 0.1, 0.9, -0.4]);
        let b = sv(vec![1.0, 0.2, -0.7, 0.4, 0.1, 0.3]);
        let r = hgr_kb(
            &a,
            &b,
            DegreeConfig { h: 1, k: 1 },
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((r.value - pearson(&a, &b).unwrap().abs()).abs() < 1e-8);
    }

    #[test]
    fn symmetric_square_is_found() {
        let a = sv(vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let b = a.map(|x| x * x).unwrap();
        assert!(pearson(&a, &b).unwrap().abs() < 1e-15);
        let r = hgr_kb(
            &a,
            &b,
            DegreeConfig { h: 2, k: 1 },
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn circle_degree_two() {
        let theta: Vec<f64> = (0..64)
            .map(|i| 2.0 * core::f64::consts::PI * i as f64 / 64.0)
            .collect();
        let a = sv(theta.iter().map(|t| libm::cos(*t)).collect());
        let b = sv(theta.iter().map(|t| libm::sin(*t)).collect());
        let r = hgr_kb(
            &a,
            &b,
            DegreeConfig { h: 2, k: 2 },
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn result_invariants() {
        let a = sv((0..40).map(|i| libm::sin(i as f64 * 1.3)).collect());
        let b = sv((0..40)
            .map(|i| libm::cos(i as f64 * 0.7) + 0.1 * i as f64)
            .collect());
        let ka = expand(&a, 3).unwrap();
        let kb = expand(&b, 4).unwrap();
        let r = hgr_kb_kernels(&ka, &kb, &SolverConfig::default()).unwrap();
        let f = ka.centered().matvec(&r.alpha);
        let g = kb.centered().matvec(&r.beta);
        assert!((stats::std_dev(&g) - 1.0).abs() < 1e-6);
        assert!((stats::std_dev(&f) - 1.0).abs() < 1e-6);
        assert!((stats::correlation(&f, &g).unwrap() - r.value).abs() < 1e-8);
        assert!((0.0..=1.0).contains(&r.value));
    }

    #[test]
    fn too_few_observations() {
        let a = sv(vec![1.0, 2.0, 3.0]);
        let b = sv(vec![1.0, 0.0, 3.0]);
        assert!(matches!(
            hgr_kb(
                &a,
                &b,
                DegreeConfig { h: 3, k: 1 },
                &SolverConfig::default()
            ),
            Err(HgrError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn warm_start_never_lowers_value() {
        let a = sv((0..30).map(|i| libm::sin(i as f64)).collect());
        let b = sv((0..30).map(|i| libm::cos(i as f64 * 2.1)).collect());
        let cold = hgr_kb(
            &a,
            &b,
            DegreeConfig { h: 3, k: 3 },
            &SolverConfig::default(),
        )
        .unwrap();
        let cfg = SolverConfig::default().with_warm_start(vec![1.0], vec![0.0, 1.0]);
        let warm = hgr_kb(&a, &b, DegreeConfig { h: 3, k: 3 }, &cfg).unwrap();
        assert!(warm.value >= cold.value);
    }

    #[test]
    fn refine_path_agrees_with_eigen() {
        let a = sv((0..50).map(|i| libm::sin(i as f64 * 0.9)).collect());
        let b = sv((0..50)
            .map(|i| {
                let x = libm::sin(i as f64 * 0.9);
                x * x + 0.2 * libm::cos(i as f64 * 3.7)
            })
            .collect());
        let deg = DegreeConfig { h: 2, k: 2 };
        let eig = hgr_kb(&a, &b, deg, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            max_iter: 5000,
            tol: 1e-10,
            ..SolverConfig::refine()
        };
        let refined = hgr_kb(&a, &b, deg, &cfg).unwrap();
        assert!(
            (eig.value - refined.value).abs() < 1e-4,
            "{} vs {} after {}",
            eig.value,
            refined.value,
            refined.diagnostics.iterations
        );
        assert!(refined.diagnostics.iterations > 0);
    }
}
