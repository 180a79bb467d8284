//! Plain SGD training of a ReLU network with one sigmoid output.

use layercomp_core::nn::{HiddenActivation, Network, OutputMap};
use layercomp_core::Matrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AdaptiveError, Result};
use crate::idx::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![20, 20],
            epochs: 10,
            batch: 100,
            lr: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub network: Network,
    /// Mean binary cross-entropy over each epoch's minibatch passes.
    pub epoch_losses: Vec<f64>,
}

/// One layer stored input-major: `w[c * rows + r]`, bias as the last input.
struct Layer {
    rows: usize,
    inputs: usize,
    w: Vec<f64>,
    grad: Vec<f64>,
}

impl Layer {
    fn forward(&self, a: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.w[self.inputs * self.rows..]);
        for (c, &v) in a.iter().enumerate() {
            if v != 0.0 {
                let col = &self.w[c * self.rows..(c + 1) * self.rows];
                for (o, &w) in out.iter_mut().zip(col) {
                    *o += w * v;
                }
            }
        }
    }

    fn accumulate(&mut self, a: &[f64], delta: &[f64]) {
        for (c, &v) in a.iter().chain(std::iter::once(&1.0)).enumerate() {
            if v != 0.0 {
                let g = &mut self.grad[c * self.rows..(c + 1) * self.rows];
                for (g, &d) in g.iter_mut().zip(delta) {
                    *g += v * d;
                }
            }
        }
    }

    fn back(&self, delta: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.inputs).map(|c| {
            let col = &self.w[c * self.rows..(c + 1) * self.rows];
            col.iter().zip(delta).map(|(w, d)| w * d).sum::<f64>()
        }));
    }

    fn to_matrix(&self) -> Matrix {
        let cols = self.inputs + 1;
        let mut data = vec![0.0; self.rows * cols];
        for r in 0..self.rows {
            for c in 0..cols {
                data[r * cols + c] = self.w[c * self.rows + r];
            }
        }
        Matrix::from_vec(self.rows, cols, data).expect("consistent shape")
    }
}

fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Trains `n0 - hidden.. - 1` with ReLU hidden layers and a sigmoid output
/// on binary cross-entropy summed over each minibatch. Weights start
/// Xavier-uniform, biases at zero.
pub fn train_mlp(data: &Dataset, cfg: &TrainConfig) -> Result<Trained> {
    if data.is_empty() {
        return Err(AdaptiveError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let widths: Vec<usize> = std::iter::once(data.features())
        .chain(cfg.hidden.iter().copied())
        .chain(std::iter::once(1))
        .collect();
    let mut layers: Vec<Layer> = widths
        .windows(2)
        .map(|p| {
            let (inputs, rows) = (p[0], p[1]);
            let bound = (6.0 / (inputs + rows) as f64).sqrt();
            let mut w: Vec<f64> = (0..inputs * rows)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            w.extend(std::iter::repeat_n(0.0, rows));
            Layer {
                rows,
                inputs,
                grad: vec![0.0; w.len()],
                w,
            }
        })
        .collect();

    let depth = layers.len();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut acts: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
    let mut pre: Vec<Vec<f64>> = vec![Vec::new(); depth];
    let (mut delta, mut back) = (Vec::new(), Vec::new());
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for chunk in order.chunks(cfg.batch.max(1)) {
            for layer in &mut layers {
                layer.grad.iter_mut().for_each(|g| *g = 0.0);
            }
            for &i in chunk {
                acts[0].clear();
                acts[0].extend_from_slice(data.sample(i));
                for l in 0..depth {
                    let (lo, hi) = acts.split_at_mut(l + 1);
                    layers[l].forward(&lo[l], &mut pre[l]);
                    hi[0].clear();
                    hi[0].extend(pre[l].iter().map(|&h| h.max(0.0)));
                }
                let z = pre[depth - 1][0];
                let y = data.label(i) as f64;
                loss += bce_with_logit(z, y);

                delta.clear();
                delta.push(1.0 / (1.0 + (-z).exp()) - y);
                for l in (0..depth).rev() {
                    layers[l].accumulate(&acts[l], &delta);
                    if l > 0 {
                        layers[l].back(&delta, &mut back);
                        delta.clear();
                        delta.extend(back.iter().zip(&pre[l - 1]).map(|(&d, &h)| {
                            if h > 0.0 {
                                d
                            } else {
                                0.0
                            }
                        }));
                    }
                }
            }
            for layer in &mut layers {
                for (w, g) in layer.w.iter_mut().zip(&layer.grad) {
                    *w -= cfg.lr * g;
                }
            }
        }
        epoch_losses.push(loss / data.len() as f64);
    }

    let network = Network::new(
        layers.iter().map(Layer::to_matrix).collect(),
        vec![HiddenActivation::Relu; cfg.hidden.len()],
        OutputMap::Sigmoid,
    )?;
    Ok(Trained {
        network,
        epoch_losses,
    })
}
