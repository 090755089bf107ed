//! Dense ReLU network trained by minibatch gradient descent.
//!
//! The learning rate adapts by halving (more generally, multiplying by
//! `decay`) whenever an epoch would increase the full training loss; such an
//! epoch is rolled back. The recorded loss history is therefore
//! non-increasing.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Encoder, MlpConfig};
use crate::data::Dataset;
use crate::rng::{rng, stream_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            out.push(self.bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub encoder: Encoder,
    pub layers: Vec<DenseLayer>,
    pub target_shift: f64,
    pub target_scale: f64,
}

impl MlpModel {
    fn forward_encoded(&self, z: &[f64]) -> f64 {
        let mut a = z.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.forward(&a, &mut next);
            if l < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut a, &mut next);
        }
        a[0]
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.forward_encoded(&self.encoder.encode(x)) * self.target_scale + self.target_shift
    }
}

struct Gradients {
    weights: Vec<Vec<f64>>,
    bias: Vec<Vec<f64>>,
}

fn train_batch(model: &mut MlpModel, batch: &[(Vec<f64>, f64)], lr: f64) {
    let n_layers = model.layers.len();
    let mut grads = Gradients {
        weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
        bias: model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
    };
    let scale = 2.0 / batch.len() as f64;
    for (z, y) in batch {
        // forward, keeping activations
        let mut acts: Vec<Vec<f64>> = vec![z.clone()];
        for (l, layer) in model.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.forward(&acts[l], &mut out);
            if l < n_layers - 1 {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        let mut delta = vec![scale * (acts[n_layers][0] - y)];
        for l in (0..n_layers).rev() {
            let layer = &model.layers[l];
            let input = &acts[l];
            for o in 0..layer.outputs {
                grads.bias[l][o] += delta[o];
                let row = &mut grads.weights[l][o * layer.inputs..(o + 1) * layer.inputs];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += delta[o] * a;
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; layer.inputs];
                for o in 0..layer.outputs {
                    let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, wi) in prev.iter_mut().zip(w) {
                        *p += delta[o] * wi;
                    }
                }
                // ReLU derivative of the previous hidden layer
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    for (l, layer) in model.layers.iter_mut().enumerate() {
        for (w, g) in layer.weights.iter_mut().zip(&grads.weights[l]) {
            *w -= lr * g;
        }
        for (b, g) in layer.bias.iter_mut().zip(&grads.bias[l]) {
            *b -= lr * g;
        }
    }
}

fn mse(model: &MlpModel, data: &[(Vec<f64>, f64)]) -> f64 {
    data.iter()
        .map(|(z, y)| {
            let e = model.forward_encoded(z) - y;
            e * e
        })
        .sum::<f64>()
        / data.len() as f64
}

/// Fits the network; returns the model and its per-epoch training MSE (in
/// target units).
pub(crate) fn fit(d: &Dataset, cfg: &MlpConfig) -> (MlpModel, Vec<f64>) {
    let encoder = Encoder::for_network(d);
    let target_shift = crate::stats::mean(d.targets());
    let sd = crate::stats::population_variance(d.targets()).sqrt();
    let target_scale = if sd > 1e-12 { sd } else { 1.0 };
    let data: Vec<(Vec<f64>, f64)> = d
        .rows()
        .iter()
        .zip(d.targets())
        .map(|(r, y)| (encoder.encode(r), (y - target_shift) / target_scale))
        .collect();

    let mut init = rng(stream_seed(cfg.seed, "mlp-init", 0));
    let mut widths = vec![encoder.width()];
    widths.extend(&cfg.hidden);
    widths.push(1);
    let layers = widths
        .windows(2)
        .map(|w| {
            let normal = Normal::new(0.0, (2.0 / w[0].max(1) as f64).sqrt()).expect("finite sd");
            DenseLayer {
                inputs: w[0],
                outputs: w[1],
                weights: (0..w[0] * w[1]).map(|_| normal.sample(&mut init)).collect(),
                bias: vec![0.0; w[1]],
            }
        })
        .collect();
    let mut model = MlpModel { encoder, layers, target_shift, target_scale };

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle = rng(stream_seed(cfg.seed, "mlp-shuffle", 0));
    let mut lr = cfg.learning_rate;
    let mut best = mse(&model, &data);
    let mut history = Vec::with_capacity(cfg.epochs);
    let batch_size = cfg.batch_size.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let mut candidate = model.clone();
        for chunk in order.chunks(batch_size) {
            let batch: Vec<(Vec<f64>, f64)> = chunk.iter().map(|&i| data[i].clone()).collect();
            train_batch(&mut candidate, &batch, lr);
        }
        let loss = mse(&candidate, &data);
        if loss.is_finite() && loss <= best {
            model = candidate;
            best = loss;
        } else {
            lr *= cfg.decay;
        }
        history.push(best * target_scale * target_scale);
        if lr < 1e-12 {
            break;
        }
    }
    (model, history)
}
