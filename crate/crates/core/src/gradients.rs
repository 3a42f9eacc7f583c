//! Gradients of the correlation indicators with respect to the second input.
//!
//! The indicators are maxima over kernel coefficients, so their gradient is
//! obtained by freezing the optimal coefficients and differentiating the
//! Pearson correlation of the two projections through the polynomial
//! expansion of `b` (powers, centering and the standardization of `b`). Where
//! the optimum is unique this equals the derivative of the re-solved value.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::correlation::{hgr_kb, hgr_sk, DegreeConfig, Direction, SolverConfig};
use crate::error::{HgrError, Result};
use crate::kernelspace::expand;
use crate::sample::{check_paired, SampleVector};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientResult {
    /// `d value / d b_i`.
    pub gradient: Vec<f64>,
    pub value: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Gradient of `rho(u, P_b * beta)` with respect to `b` for a fixed vector
/// `u`, where `P_b` is the centered expansion of standardized `b`.
pub fn frozen_gradient(u: &[f64], b: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
    if u.len() != b.len() {
        return Err(HgrError::LengthMismatch {
            left: u.len(),
            right: b.len(),
        });
    }
    let n = b.len() as f64;
    let mean_b = stats::mean(b);
    let sd_b = stats::std_dev(b);
    if !(sd_b > 0.0) {
        return Err(HgrError::ZeroVariance);
    }
    let z: Vec<f64> = b.iter().map(|x| (x - mean_b) / sd_b).collect();
    // v_i = sum_j beta_j (z_i^j - mean(z^j)); dv_i/dz_i = sum_j j beta_j z_i^(j-1)
    let mut v = vec![0.0; z.len()];
    let mut dv = vec![0.0; z.len()];
    for (i, &zi) in z.iter().enumerate() {
        let mut pow = 1.0;
        for (j, bj) in beta.iter().enumerate() {
            dv[i] += (j + 1) as f64 * bj * pow;
            pow *= zi;
            v[i] += bj * pow;
        }
    }
    let uc = stats::centered(u);
    let vc = stats::centered(&v);
    let su = libm::sqrt(stats::dot(&uc, &uc) / n);
    let sv = libm::sqrt(stats::dot(&vc, &vc) / n);
    if !(su > 0.0) || !(sv > 0.0) {
        return Err(HgrError::ZeroVariance);
    }
    let rho = stats::dot(&uc, &vc) / (n * su * sv);
    // d rho / d v_i; sums to zero, so the column-mean terms drop out
    let g: Vec<f64> = uc
        .iter()
        .zip(&vc)
        .map(|(x, y)| (x / (su * sv) - rho * y / (sv * sv)) / n)
        .collect();
    let w: Vec<f64> = g.iter().zip(&dv).map(|(a, b)| a * b).collect();
    let w_mean = stats::mean(&w);
    let wz = stats::dot(&w, &z) / n;
    Ok(w.iter()
        .zip(&z)
        .map(|(wi, zi)| (wi - w_mean - zi * wz) / sd_b)
        .collect())
}

/// Closed-form gradient of `pearson(a, b)` with respect to `b`.
pub fn pearson_gradient(a: &SampleVector, b: &SampleVector) -> Result<Vec<f64>> {
    check_paired(a, b)?;
    let n = a.len() as f64;
    let ac = stats::centered(a.values());
    let bc = stats::centered(b.values());
    let sa = libm::sqrt(stats::dot(&ac, &ac) / n);
    let sb = libm::sqrt(stats::dot(&bc, &bc) / n);
    let rho = stats::dot(&ac, &bc) / (n * sa * sb);
    Ok(ac
        .iter()
        .zip(&bc)
        .map(|(x, y)| (x / (sa * sb) - rho * y / (sb * sb)) / n)
        .collect())
}

/// Envelope gradient of `HGR-KB(a, b; h, k)` with respect to `b`.
pub fn hgr_kb_subgradient(
    a: &SampleVector,
    b: &SampleVector,
    deg: DegreeConfig,
    cfg: &SolverConfig,
) -> Result<GradientResult> {
    let res = hgr_kb(a, b, deg, cfg)?;
    let ka = expand(a, deg.h)?;
    let u = ka.centered().matvec(&res.alpha);
    let gradient = frozen_gradient(&u, b.values(), &res.beta)?;
    Ok(GradientResult {
        gradient,
        value: res.value,
        alpha: res.alpha,
        beta: res.beta,
    })
}

/// Envelope gradient of `HGR-SK(a, b; d)` with respect to `b`, taken on the
/// winning direction.
pub fn hgr_sk_gradient(
    a: &SampleVector,
    b: &SampleVector,
    d: usize,
    cfg: &SolverConfig,
) -> Result<GradientResult> {
    let res = hgr_sk(a, b, d, cfg)?;
    let ka = match res.direction {
        Direction::BToA => expand(a, 1)?,
        _ => expand(a, d)?,
    };
    let u = ka.centered().matvec(&res.alpha);
    let gradient = frozen_gradient(&u, b.values(), &res.beta)?;
    Ok(GradientResult {
        gradient,
        value: res.value,
        alpha: res.alpha,
        beta: res.beta,
    })
}

/// Central-difference estimate of the gradient of `f` at `b`.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, b: &[f64], step: f64) -> Vec<f64> {
    let mut x = b.to_vec();
    (0..b.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + step;
            let up = f(&x);
            x[i] = orig - step;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Magnitude under which gradient entries are skipped by [`finite_diff_check`].
pub const FD_MAGNITUDE_FLOOR: f64 = 1e-7;

/// Compares `analytic` against central differences of `f` at `b` and returns
/// the largest relative error `|num - ana| / max(|num|, |ana|)` over entries
/// where either magnitude exceeds [`FD_MAGNITUDE_FLOOR`].
pub fn finite_diff_check(f: impl Fn(&[f64]) -> f64, b: &[f64], analytic: &[f64], step: f64) -> f64 {
    let numeric = numeric_gradient(f, b, step);
    numeric
        .iter()
        .zip(analytic)
        .filter_map(|(num, ana)| {
            let scale = num.abs().max(ana.abs());
            (scale > FD_MAGNITUDE_FLOOR).then(|| (num - ana).abs() / scale)
        })
        .fold(0.0, f64::max)
}

/// `max{0, value - tau}`.
pub fn hinge_penalty(value: f64, tau: f64) -> f64 {
    (value - tau).max(0.0)
}

/// Subgradient of [`hinge_penalty`] composed with an indicator whose gradient
/// is `grad`. At `value == tau` the active branch is returned.
pub fn hinge_gradient(value: f64, tau: f64, grad: &[f64]) -> Vec<f64> {
    if value < tau {
        vec![0.0; grad.len()]
    } else {
        grad.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: Vec<f64>) -> SampleVector {
        SampleVector::new(v).unwrap()
    }

    #[test]
    fn identical_vectors_have_zero_gradient() {
        let a = sv((0..20).map(|i| libm::sin(i as f64)).collect());
        let g = hgr_kb_subgradient(
            &a,
            &a,
            DegreeConfig { h: 1, k: 1 },
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((g.value - 1.0).abs() < 1e-12);
        assert!(g.gradient.iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn constant_function_has_zero_error() {
        let b = [1.0, 2.0, 3.0];
        assert_eq!(finite_diff_check(|_| 4.0, &b, &[0.0; 3], 1e-6), 0.0);
    }

    #[test]
    fn pearson_gradient_matches_finite_differences() {
        let a = sv((0..30).map(|i| libm::sin(i as f64 * 0.7)).collect());
        let b = sv((0..30)
            .map(|i| libm::cos(i as f64 * 0.3) + 0.05 * i as f64)
            .collect());
        let ana = pearson_gradient(&a, &b).unwrap();
        let av = a.values().to_vec();
        let err = finite_diff_check(
            |x| stats::correlation(&av, x).unwrap(),
            b.values(),
            &ana,
            1e-6,
        );
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn sk_degree_one_matches_abs_pearson_gradient() {
        let a = sv((0..30).map(|i| libm::sin(i as f64 * 0.7)).collect());
        let b = sv((0..30)
            .map(|i| -libm::sin(i as f64 * 0.7) + 0.3 * libm::cos(i as f64))
            .collect());
        let g = hgr_sk_gradient(&a, &b, 1, &SolverConfig::default()).unwrap();
        let p = pearson_gradient(&a, &b).unwrap();
        let sign = crate::correlation::pearson(&a, &b).unwrap().signum();
        for (x, y) in g.gradient.iter().zip(&p) {
            assert!((x - sign * y).abs() < 1e-8);
        }
    }

    #[test]
    fn hinge_behaviour() {
        let g = [0.5, -0.5];
        assert_eq!(hinge_gradient(0.2, 0.3, &g), vec![0.0, 0.0]);
        assert_eq!(hinge_gradient(0.3, 0.3, &g), g.to_vec());
        assert_eq!(hinge_gradient(0.4, 0.3, &g), g.to_vec());
        assert_eq!(hinge_penalty(0.2, 0.3), 0.0);
        assert!((hinge_penalty(0.5, 0.3) - 0.2).abs() < 1e-15);
    }
}
