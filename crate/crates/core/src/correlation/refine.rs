//! Iterative solver for `min ||A alpha - B beta||^2 / n  s.t.  ||B beta||^2 / n = 1`
//! working directly on the data matrices.
//!
//! Each iteration takes a gradient step on both coefficient blocks (the `beta`
//! block projected onto the constraint's tangent space; step from the
//! Barzilai-Borwein rule, Armijo backtracking), then restores the constraint
//! by rescaling `beta`. Columns are equilibrated to unit variance
//! first; coefficients are mapped back before returning.

use alloc::vec::Vec;

use crate::linalg::Matrix;

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub iterations: usize,
    /// Final objective `||A alpha - B beta||^2 / n`.
    pub residual: f64,
}

struct Problem {
    a: Matrix,
    b: Matrix,
    scale_a: Vec<f64>,
    scale_b: Vec<f64>,
    n: f64,
}

fn equilibrate(m: &Matrix) -> (Matrix, Vec<f64>) {
    let n = m.rows();
    let scale: Vec<f64> = (0..m.cols())
        .map(|j| {
            let s = libm::sqrt((0..n).map(|i| m[(i, j)] * m[(i, j)]).sum::<f64>() / n as f64);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut out = m.clone();
    for i in 0..n {
        for (v, s) in out.row_mut(i).iter_mut().zip(&scale) {
            *v /= s;
        }
    }
    (out, scale)
}

impl Problem {
    fn residual(&self, alpha: &[f64], beta: &[f64]) -> Vec<f64> {
        let mut r = self.a.matvec(alpha);
        let bb = self.b.matvec(beta);
        for (x, y) in r.iter_mut().zip(&bb) {
            *x -= y;
        }
        r
    }

    fn objective(&self, r: &[f64]) -> f64 {
        r.iter().map(|x| x * x).sum::<f64>() / self.n
    }

    /// Rescales `beta` onto the constraint surface. Returns false when `B beta`
    /// vanishes.
    fn retract(&self, beta: &mut [f64]) -> bool {
        let v = self.b.matvec(beta);
        let s = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>() / self.n);
        if !(s > 0.0) || !s.is_finite() {
            return false;
        }
        beta.iter_mut().for_each(|x| *x /= s);
        true
    }

    /// Removes from `gb` its component along the constraint normal at `beta`.
    fn project_tangent(&self, gb: &mut [f64], beta: &[f64]) {
        let v = self.b.matvec(beta);
        let normal = self.b.tr_matvec(&v);
        let nn: f64 = normal.iter().map(|x| x * x).sum();
        if nn > 0.0 {
            let proj = gb.iter().zip(&normal).map(|(g, c)| g * c).sum::<f64>() / nn;
            gb.iter_mut().zip(&normal).for_each(|(g, c)| *g -= proj * c);
        }
    }

    /// Gradient of the objective, with the `beta` block projected onto the
    /// tangent space of the constraint.
    fn gradient(&self, r: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let f = 2.0 / self.n;
        let ga: Vec<f64> = self.a.tr_matvec(r).into_iter().map(|x| f * x).collect();
        let mut gb: Vec<f64> = self.b.tr_matvec(r).into_iter().map(|x| -f * x).collect();
        self.project_tangent(&mut gb, beta);
        (ga, gb)
    }
}

/// Runs the projected-gradient iteration from `(alpha0, beta0)` until the
/// relative objective decrease falls under `tol` and the tangent gradient
/// norm under `sqrt(tol)`, or `max_iter` is reached.
pub fn refine_residual(
    a: &Matrix,
    b: &Matrix,
    alpha0: &[f64],
    beta0: &[f64],
    tol: f64,
    max_iter: usize,
) -> RefineOutcome {
    let (ae, scale_a) = equilibrate(a);
    let (be, scale_b) = equilibrate(b);
    let p = Problem {
        a: ae,
        b: be,
        scale_a,
        scale_b,
        n: a.rows() as f64,
    };
    let mut alpha: Vec<f64> = alpha0.iter().zip(&p.scale_a).map(|(x, s)| x * s).collect();
    let mut beta: Vec<f64> = beta0.iter().zip(&p.scale_b).map(|(x, s)| x * s).collect();
    if !p.retract(&mut beta) {
        beta.iter_mut().for_each(|x| *x = 0.0);
        beta[0] = 1.0;
        p.retract(&mut beta);
    }

    let r = p.residual(&alpha, &beta);
    let mut f = p.objective(&r);
    let (mut ga, mut gb) = p.gradient(&r, &beta);
    let mut step = 0.5;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let gnorm2: f64 = ga.iter().chain(&gb).map(|x| x * x).sum();
        if gnorm2 == 0.0 {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let na: Vec<f64> = alpha.iter().zip(&ga).map(|(x, g)| x - t * g).collect();
            let mut nb: Vec<f64> = beta.iter().zip(&gb).map(|(x, g)| x - t * g).collect();
            if p.retract(&mut nb) {
                let nr = p.residual(&na, &nb);
                let nf = p.objective(&nr);
                if nf <= f - 1e-4 * t * gnorm2 {
                    accepted = Some((na, nb, nr, nf));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((na, nb, nr, nf)) = accepted else {
            break;
        };
        let (nga, ngb) = p.gradient(&nr, &nb);
        // Barzilai-Borwein step for the next iteration
        let mut ss = 0.0;
        let mut sy = 0.0;
        for ((x1, x0), (g1, g0)) in na
            .iter()
            .chain(&nb)
            .zip(alpha.iter().chain(&beta))
            .zip(nga.iter().chain(&ngb).zip(ga.iter().chain(&gb)))
        {
            let s = x1 - x0;
            let y = g1 - g0;
            ss += s * s;
            sy += s * y;
        }
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-10, 1e10)
        } else {
            (2.0 * t).min(1e10)
        };

        let decrease = f - nf;
        alpha = na;
        beta = nb;
        f = nf;
        ga = nga;
        gb = ngb;
        let gnorm = libm::sqrt(ga.iter().chain(&gb).map(|x| x * x).sum::<f64>());
        if decrease <= tol * f.max(tol) && gnorm <= libm::sqrt(tol) {
            break;
        }
    }

    RefineOutcome {
        alpha: alpha.iter().zip(&p.scale_a).map(|(x, s)| x / s).collect(),
        beta: beta.iter().zip(&p.scale_b).map(|(x, s)| x / s).collect(),
        iterations,
        residual: f,
    }
}
