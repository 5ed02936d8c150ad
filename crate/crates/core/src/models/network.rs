//! Fully connected ReLU networks trained with Adam: the MLP classifier
//! (sigmoid output, cross-entropy) and the autoencoder (linear output,
//! mean squared reconstruction error).
//!
//! Inputs are standardized per column inside the network (categorical codes
//! would otherwise dominate), so callers always pass encoded rows.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::MlpParams;
use crate::math::{mean_std, sigmoid, softplus, sqrt};
use crate::rng::Rng;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// Single sigmoid output against a 0/1 target.
    CrossEntropy,
    /// Identity outputs against a target vector, averaged over outputs.
    MeanSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Dense>,
    pub loss: Loss,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
}

impl Network {
    /// He-initialized network `n_in → hidden… → n_out` with identity input
    /// scaling.
    pub fn new(n_in: usize, hidden: &[usize], n_out: usize, loss: Loss, rng: &mut Rng) -> Self {
        let mut sizes = alloc::vec![n_in];
        sizes.extend_from_slice(hidden);
        sizes.push(n_out);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let std = sqrt(2.0 / n_in.max(1) as f64);
                let normal = Normal::new(0.0, std).expect("finite std");
                Dense { n_in, n_out, weights: (0..n_in * n_out).map(|_| normal.sample(rng)).collect(), bias: alloc::vec![0.0; n_out] }
            })
            .collect();
        Self { layers, loss, input_mean: alloc::vec![0.0; n_in], input_std: alloc::vec![1.0; n_in] }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers.first().map_or(0, |l| l.n_in)
    }

    pub fn n_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_parameters());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_parameters());
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[k..k + nw]);
            k += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
    }

    fn fit_scaling(&mut self, x: &Matrix) {
        for j in 0..x.cols() {
            let (m, s) = mean_std(&x.column(j));
            self.input_mean[j] = m;
            self.input_std[j] = if s > 0.0 { s } else { 1.0 };
        }
    }

    pub fn scale_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(x.iter().zip(&self.input_mean).zip(&self.input_std).map(|((v, m), s)| (v - m) / s));
    }

    /// Output-layer pre-activations for one already-scaled input.
    fn forward_scaled(&self, scaled: &[f64], buf_a: &mut Vec<f64>, buf_b: &mut Vec<f64>) {
        buf_a.clear();
        buf_a.extend_from_slice(scaled);
        let last = self.layers.len().saturating_sub(1);
        for (li, l) in self.layers.iter().enumerate() {
            buf_b.clear();
            for o in 0..l.n_out {
                let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                let mut z = l.bias[o];
                for (w, a) in row.iter().zip(buf_a.iter()) {
                    z += w * a;
                }
                buf_b.push(if li < last { z.max(0.0) } else { z });
            }
            core::mem::swap(buf_a, buf_b);
        }
    }

    /// Fraud probability (cross-entropy nets) or per-instance mean squared
    /// reconstruction error in scaled space (autoencoders).
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut scaled = Vec::with_capacity(x.len());
        self.scale_into(x, &mut scaled);
        let mut a = Vec::new();
        let mut b = Vec::new();
        self.forward_scaled(&scaled, &mut a, &mut b);
        match self.loss {
            Loss::CrossEntropy => sigmoid(a[0]),
            Loss::MeanSquared => {
                let d = scaled.len().max(1) as f64;
                a.iter().zip(&scaled).map(|(o, t)| (o - t) * (o - t)).sum::<f64>() / d
            }
        }
    }

    /// Mean batch loss and its gradient with respect to [`Self::parameters`].
    ///
    /// `inputs` rows are already scaled. For cross-entropy, `targets` is
    /// `B × 1` with 0/1 entries; for mean squared, `B × n_out`. `weights`
    /// optionally reweights samples (cross-entropy only).
    pub fn loss_and_gradient(&self, inputs: &Matrix, targets: &Matrix, weights: Option<&[f64]>) -> (f64, Vec<f64>) {
        let bsz = inputs.rows();
        let n_layers = self.layers.len();
        // activations[l] holds the input to layer l; pre[l] its pre-activation.
        let mut activations: Vec<Matrix> = Vec::with_capacity(n_layers + 1);
        let mut pre: Vec<Matrix> = Vec::with_capacity(n_layers);
        activations.push(inputs.clone());
        for (li, l) in self.layers.iter().enumerate() {
            let input = &activations[li];
            let mut z = Matrix::zeros(bsz, l.n_out);
            let mut a = Matrix::zeros(bsz, l.n_out);
            for s in 0..bsz {
                let x = input.row(s);
                for o in 0..l.n_out {
                    let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                    let v = l.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                    z.set(s, o, v);
                    a.set(s, o, if li + 1 < n_layers { v.max(0.0) } else { v });
                }
            }
            pre.push(z);
            activations.push(a);
        }

        let out = &pre[n_layers - 1];
        let n_out = self.layers[n_layers - 1].n_out;
        let mut delta = Matrix::zeros(bsz, n_out);
        let mut loss = 0.0;
        match self.loss {
            Loss::CrossEntropy => {
                let w_total: f64 = weights.map_or(bsz as f64, |w| w.iter().sum());
                for s in 0..bsz {
                    let w = weights.map_or(1.0, |w| w[s]);
                    let z = out.get(s, 0);
                    let y = targets.get(s, 0);
                    loss += w * (softplus(z) - y * z);
                    delta.set(s, 0, w * (sigmoid(z) - y) / w_total);
                }
                loss /= w_total;
            }
            Loss::MeanSquared => {
                let denom = (bsz * n_out) as f64;
                for s in 0..bsz {
                    for o in 0..n_out {
                        let r = out.get(s, o) - targets.get(s, o);
                        loss += r * r;
                        delta.set(s, o, 2.0 * r / denom);
                    }
                }
                loss /= denom;
            }
        }

        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
        for li in (0..n_layers).rev() {
            let l = &self.layers[li];
            let input = &activations[li];
            let mut gw = alloc::vec![0.0; l.weights.len()];
            let mut gb = alloc::vec![0.0; l.n_out];
            for s in 0..bsz {
                let x = input.row(s);
                for o in 0..l.n_out {
                    let dz = delta.get(s, o);
                    if dz == 0.0 {
                        continue;
                    }
                    gb[o] += dz;
                    for (g, v) in gw[o * l.n_in..(o + 1) * l.n_in].iter_mut().zip(x) {
                        *g += dz * v;
                    }
                }
            }
            if li > 0 {
                let prev_pre = &pre[li - 1];
                let mut next = Matrix::zeros(bsz, l.n_in);
                for s in 0..bsz {
                    for o in 0..l.n_out {
                        let dz = delta.get(s, o);
                        if dz == 0.0 {
                            continue;
                        }
                        let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                        let target = next.row_mut(s);
                        for (t, w) in target.iter_mut().zip(row) {
                            *t += dz * w;
                        }
                    }
                    for k in 0..l.n_in {
                        if prev_pre.get(s, k) <= 0.0 {
                            next.set(s, k, 0.0);
                        }
                    }
                }
                delta = next;
            }
            gw.extend_from_slice(&gb);
            grads.push(gw);
        }
        let mut flat = Vec::with_capacity(self.n_parameters());
        for g in grads.into_iter().rev() {
            flat.extend(g);
        }
        (loss, flat)
    }
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize, params: &MlpParams) -> Self {
        Self {
            lr: params.learning_rate,
            beta1: params.beta1,
            beta2: params.beta2,
            epsilon: params.epsilon,
            m: alloc::vec![0.0; n],
            v: alloc::vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for k in 0..theta.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            let mhat = self.m[k] / c1;
            let vhat = self.v[k] / c2;
            theta[k] -= self.lr * mhat / (sqrt(vhat) + self.epsilon);
        }
    }
}

/// Minibatch Adam training. `targets` is `None` for autoencoders (inputs are
/// reconstructed) and the label column otherwise.
pub(crate) fn train_network(
    x: &Matrix,
    labels: Option<&[u8]>,
    sample_weights: Option<&[f64]>,
    params: &MlpParams,
    seed: u64,
) -> Result<Network> {
    let (loss, n_out, model) = match labels {
        Some(_) => (Loss::CrossEntropy, 1, "neural network"),
        None => (Loss::MeanSquared, x.cols(), "autoencoder"),
    };
    let mut rng = crate::rng::seeded(seed);
    let mut net = Network::new(x.cols(), &params.hidden, n_out, loss, &mut rng);
    net.fit_scaling(x);
    let mut scaled = Matrix::zeros(x.rows(), x.cols());
    let mut buf = Vec::new();
    for i in 0..x.rows() {
        net.scale_into(x.row(i), &mut buf);
        scaled.row_mut(i).copy_from_slice(&buf);
    }
    let mut theta = net.parameters();
    let mut adam = Adam::new(theta.len(), params);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let batch = params.batch_size.max(1);
    let mut step = 0usize;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let inputs = scaled.select_rows(chunk);
            let targets = match labels {
                Some(y) => Matrix::from_vec(chunk.len(), 1, chunk.iter().map(|&i| y[i] as f64).collect()),
                None => inputs.clone(),
            };
            let w: Option<Vec<f64>> = sample_weights.map(|w| chunk.iter().map(|&i| w[i]).collect());
            let (l, g) = net.loss_and_gradient(&inputs, &targets, w.as_deref());
            if !l.is_finite() || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { model, iteration: step });
            }
            adam.step(&mut theta, &g);
            net.set_parameters(&theta);
            step += 1;
        }
    }
    Ok(net)
}
