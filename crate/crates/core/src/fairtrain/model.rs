//! Fully-connected network with ReLU hidden layers and a single linear
//! output unit, plus an Adam optimizer over its flattened parameters.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `out x in`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Activations kept from a forward pass for backpropagation.
pub struct ForwardPass {
    /// Layer inputs: `inputs[0]` is the data, `inputs[l]` the ReLU output of
    /// hidden layer `l - 1`.
    inputs: Vec<Matrix>,
    /// Pre-activations of every layer.
    pre: Vec<Matrix>,
}

impl ForwardPass {
    /// Raw (pre-link) network output, one value per row.
    pub fn output(&self) -> Vec<f64> {
        self.pre.last().expect("network has a layer").column(0)
    }
}

impl Mlp {
    /// Uniform initialization in `+-1/sqrt(fan_in)` from a seeded stream.
    pub fn new(inputs: usize, hidden: &[usize], seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / libm::sqrt(fan_in.max(1) as f64);
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                let bias = (0..fan_out)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                Layer {
                    weights: Matrix::from_row_major(fan_out, fan_in, data),
                    bias,
                }
            })
            .collect();
        Mlp { layers }
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(
            params.len(),
            self.n_params(),
            "parameter vector has wrong length"
        );
        let mut offset = 0;
        for l in &mut self.layers {
            let (rows, cols) = (l.weights.rows(), l.weights.cols());
            let w = params[offset..offset + rows * cols].to_vec();
            offset += rows * cols;
            l.weights = Matrix::from_row_major(rows, cols, w);
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    pub fn forward(&self, x: &Matrix) -> ForwardPass {
        let mut inputs = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let input = inputs.last().expect("input");
            let mut z = input.matmul(&layer.weights.transpose());
            for i in 0..z.rows() {
                for (v, b) in z.row_mut(i).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            if li < last {
                let mut h = z.clone();
                for i in 0..h.rows() {
                    for v in h.row_mut(i) {
                        *v = v.max(0.0);
                    }
                }
                inputs.push(h);
            }
            pre.push(z);
        }
        ForwardPass { inputs, pre }
    }

    /// Raw outputs for `x`.
    pub fn predict_raw(&self, x: &Matrix) -> Vec<f64> {
        self.forward(x).output()
    }

    /// Gradient of a loss with respect to all parameters, given the loss
    /// gradient `d_out` with respect to the raw outputs.
    pub fn backward(&self, pass: &ForwardPass, d_out: &[f64]) -> Vec<f64> {
        let n = d_out.len();
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(self.layers.len());
        let mut delta = Matrix::from_row_major(n, 1, d_out.to_vec());
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &pass.inputs[li];
            let dw = delta.cross(input, 1.0);
            let db: Vec<f64> = (0..delta.cols())
                .map(|j| (0..n).map(|i| delta[(i, j)]).sum())
                .collect();
            grads.push((dw.as_slice().to_vec(), db));
            if li > 0 {
                let mut d_in = delta.matmul(&layer.weights);
                let z = &pass.pre[li - 1];
                for i in 0..n {
                    for (d, zv) in d_in.row_mut(i).iter_mut().zip(z.row(i)) {
                        if *zv <= 0.0 {
                            *d = 0.0;
                        }
                    }
                }
                delta = d_in;
            }
        }
        grads.reverse();
        let mut flat = Vec::with_capacity(self.n_params());
        for (w, b) in grads {
            flat.extend(w);
            flat.extend(b);
        }
        flat
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Adam {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let mh = *m / c1;
            let vh = *v / c2;
            *p -= self.lr * mh / (libm::sqrt(vh) + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip() {
        let mut net = Mlp::new(3, &[4, 2], 1);
        let p = net.params();
        assert_eq!(p.len(), 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
        let shifted: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
        net.set_params(&shifted);
        assert_eq!(net.params(), shifted);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let net = Mlp::new(2, &[5], 7);
        let x = Matrix::from_row_major(4, 2, vec![0.1, -0.3, 0.7, 0.2, -0.5, 0.9, 0.3, 0.3]);
        let target = [0.2, -0.1, 0.4, 0.0];
        let loss = |m: &Mlp| -> f64 {
            m.predict_raw(&x)
                .iter()
                .zip(&target)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
        };
        let pass = net.forward(&x);
        let d_out: Vec<f64> = pass
            .output()
            .iter()
            .zip(&target)
            .map(|(p, t)| 2.0 * (p - t))
            .collect();
        let analytic = net.backward(&pass, &d_out);
        let base = net.params();
        for i in 0..base.len() {
            let mut up = net.clone();
            let mut p = base.clone();
            p[i] += 1e-6;
            up.set_params(&p);
            let mut down = net.clone();
            p[i] -= 2e-6;
            down.set_params(&p);
            let num = (loss(&up) - loss(&down)) / 2e-6;
            assert!(
                (num - analytic[i]).abs() < 1e-6,
                "param {i}: {num} vs {}",
                analytic[i]
            );
        }
    }

    #[test]
    fn adam_moves_against_gradient() {
        let mut opt = Adam::new(0.1, 2);
        let mut p = [1.0, -1.0];
        opt.step(&mut p, &[1.0, -1.0]);
        assert!(p[0] < 1.0 && p[1] > -1.0);
    }
}
