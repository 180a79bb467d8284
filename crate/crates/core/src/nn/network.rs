//! Layered evaluation of a feed-forward network.
//!
//! Every weight matrix carries its bias as a final column, so layer `l`
//! computes `H(l+1) = W(l) [sigma_l(H(l)); 1]` with `sigma_0` the identity.
//! Resolution `r` feeds in the `r`-th bit-plane of the input and of every
//! weight matrix and pushes the resulting change through the network using
//! the exact piecewise-linear delta of each activation:
//!
//! ```text
//! dH(l+1) = A_l dS + dA_l sigma_l(H(l)) + dA_l dS,   dS = sigma_l^{H(l)}(dH(l))
//! ```
//!
//! where `A_l` is the weight accumulated over earlier resolutions.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::activation::{HiddenActivation, OutputMap};
use crate::nn::pla::PiecewiseLinear;
use crate::numerics::{partition, LayeredMatrix, PartitioningVector};

/// Plain network description: weights with bias column, hidden activations
/// for layers `1..=L` and the output map.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: Vec<Matrix>,
    hidden: Vec<HiddenActivation>,
    output: OutputMap,
}

impl Network {
    pub fn new(
        weights: Vec<Matrix>,
        hidden: Vec<HiddenActivation>,
        output: OutputMap,
    ) -> Result<Self> {
        if weights.is_empty() || hidden.len() + 1 != weights.len() {
            return Err(Error::ShapeMismatch {
                expected: format!(
                    "{} weight layers for {} hidden activations",
                    hidden.len() + 1,
                    hidden.len()
                ),
                actual: format!("{} weight layers", weights.len()),
            });
        }
        for l in 1..weights.len() {
            if weights[l].cols() != weights[l - 1].rows() + 1 {
                return Err(Error::ShapeMismatch {
                    expected: format!("layer {l} with {} columns", weights[l - 1].rows() + 1),
                    actual: format!("{} columns", weights[l].cols()),
                });
            }
        }
        if weights[0].cols() < 2 {
            return Err(Error::ShapeMismatch {
                expected: "input layer with at least one input and a bias column".into(),
                actual: format!("{} columns", weights[0].cols()),
            });
        }
        hidden.iter().try_for_each(|a| a.to_pla().map(drop))?;
        Ok(Self {
            weights,
            hidden,
            output,
        })
    }

    /// Number of hidden layers `L`.
    pub fn hidden_layers(&self) -> usize {
        self.hidden.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn hidden(&self) -> &[HiddenActivation] {
        &self.hidden
    }

    pub fn output(&self) -> OutputMap {
        self.output
    }

    /// `[n_0, n_1, .., n_{L+1}]`, bias columns excluded.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.weights[0].cols() - 1)
            .chain(self.weights.iter().map(Matrix::rows))
            .collect()
    }

    pub fn input_width(&self) -> usize {
        self.weights[0].cols() - 1
    }

    /// Pre-activations `H(1)..H(L+1)` of a one-shot pass.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let plas = self.plas()?;
        let mut out = Vec::with_capacity(self.weights.len());
        let mut act = x.to_vec();
        for (l, w) in self.weights.iter().enumerate() {
            if l > 0 {
                act = out
                    .last()
                    .map(|h: &Vec<f64>| h.iter().map(|&v| plas[l - 1].eval(v)).collect())
                    .expect("previous layer");
            }
            act.push(1.0);
            out.push(w.matvec(&act)?);
        }
        Ok(out)
    }

    /// One-shot evaluation.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pre = self.pre_activations(x)?;
        Ok(self.output.apply(pre.last().expect("at least one layer")))
    }

    fn plas(&self) -> Result<Vec<PiecewiseLinear>> {
        self.hidden.iter().map(HiddenActivation::to_pla).collect()
    }
}

fn prune(v: f64, h_min: i32) -> f64 {
    let scale = 2f64.powi(-h_min);
    (v * scale).floor() / scale
}

/// Weights partitioned once, shared by any number of per-sample evaluations.
#[derive(Debug, Clone)]
pub struct LayeredModel {
    network: Network,
    weights: Vec<LayeredMatrix>,
    plas: Vec<PiecewiseLinear>,
    pv_x: PartitioningVector,
    h_min: i32,
}

impl LayeredModel {
    pub fn new(
        network: Network,
        pv_x: PartitioningVector,
        pv_w: Vec<PartitioningVector>,
        h_min: i32,
    ) -> Result<Self> {
        if pv_w.len() != network.weights.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weight partitioning vectors", network.weights.len()),
                actual: format!("{}", pv_w.len()),
            });
        }
        if let Some(p) = pv_w.iter().find(|p| p.depth() != pv_x.depth()) {
            return Err(Error::MismatchedDepth {
                left: pv_x.depth(),
                right: p.depth(),
            });
        }
        let weights = network
            .weights
            .iter()
            .zip(&pv_w)
            .map(|(w, p)| partition(w, p))
            .collect::<Result<Vec<_>>>()?;
        let plas = network.plas()?;
        Ok(Self {
            network,
            weights,
            plas,
            pv_x,
            h_min,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn resolutions(&self) -> usize {
        self.pv_x.depth()
    }

    pub fn h_min(&self) -> i32 {
        self.h_min
    }

    pub fn input_partitioning(&self) -> &PartitioningVector {
        &self.pv_x
    }

    pub fn weight_partitioning(&self) -> Vec<PartitioningVector> {
        self.weights
            .iter()
            .map(|w| w.partitioning().clone())
            .collect()
    }

    pub fn layered_weights(&self) -> &[LayeredMatrix] {
        &self.weights
    }

    /// The same network with every weight replaced by its full-depth
    /// quantised value.
    pub fn quantized_network(&self) -> Result<Network> {
        let weights = self
            .weights
            .iter()
            .map(|w| w.reconstruct(w.depth()))
            .collect::<Result<Vec<_>>>()?;
        Network::new(weights, self.network.hidden.clone(), self.network.output)
    }

    /// Input quantised exactly as the layered evaluation sees it.
    pub fn quantize_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        let lm = partition(&Matrix::column(x), &self.pv_x)?;
        Ok(lm.reconstruct(lm.depth())?.into_vec())
    }

    /// Fresh evaluation state for one sample.
    pub fn start(&self, x: &[f64]) -> Result<LayeredNetwork<'_>> {
        if x.len() != self.network.input_width() {
            return Err(Error::ShapeMismatch {
                expected: format!("input of length {}", self.network.input_width()),
                actual: format!("length {}", x.len()),
            });
        }
        let input = partition(&Matrix::column(x), &self.pv_x)?;
        let accumulated = self
            .weights
            .iter()
            .map(|w| vec![0.0; w.rows() * w.cols()])
            .collect();
        let hidden = self
            .network
            .widths()
            .into_iter()
            .map(|n| vec![0.0; n])
            .collect();
        Ok(LayeredNetwork {
            model: self,
            input,
            accumulated,
            hidden,
            resolution: 0,
        })
    }
}

/// Per-sample state of the layered evaluation.
#[derive(Debug, Clone)]
pub struct LayeredNetwork<'a> {
    model: &'a LayeredModel,
    input: LayeredMatrix,
    accumulated: Vec<Vec<f64>>,
    hidden: Vec<Vec<f64>>,
    resolution: usize,
}

impl LayeredNetwork<'_> {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn resolutions(&self) -> usize {
        self.model.resolutions()
    }

    /// Accumulated weights `A_l`, row-major with bias column.
    pub fn accumulated_weights(&self, l: usize) -> &[f64] {
        &self.accumulated[l]
    }

    /// Accumulated pre-activation `H(l)` for `l` in `0..=L+1`.
    pub fn pre_activation(&self, l: usize) -> &[f64] {
        &self.hidden[l]
    }

    /// Output of the current resolution, `sigma'(H(L+1))`.
    pub fn output(&self) -> Vec<f64> {
        self.model
            .network
            .output
            .apply(self.hidden.last().expect("output layer"))
    }

    /// Applies the next resolution upgrade and returns `Omega_r`.
    pub fn upgrade(&mut self) -> Result<Vec<f64>> {
        let total = self.resolutions();
        if self.resolution == total {
            return Err(Error::AlreadyComplete(total));
        }
        let r = self.resolution + 1;
        let h_min = self.model.h_min;

        let x_scale = 2f64.powi(self.model.pv_x.exponent(r));
        let mut dh: Vec<f64> = self
            .input
            .component(r)?
            .iter()
            .map(|&v| v as f64 * x_scale)
            .collect();

        for (l, layer) in self.model.weights.iter().enumerate() {
            let pla = (l > 0).then(|| &self.model.plas[l - 1]);
            let h = &mut self.hidden[l];
            let (mut sigma_h, mut dh_sigma): (Vec<f64>, Vec<f64>) = match pla {
                Some(f) => h
                    .iter()
                    .zip(&dh)
                    .map(|(&t, &d)| (f.eval(t), f.delta(t, d)))
                    .unzip(),
                None => (h.clone(), dh.clone()),
            };
            sigma_h.push(1.0);
            dh_sigma.push(0.0);
            for (acc, d) in h.iter_mut().zip(&dh) {
                *acc += d;
            }

            let cols = layer.cols();
            let w_scale = 2f64.powi(layer.scale(r));
            let step: Vec<f64> = layer
                .component(r)?
                .iter()
                .map(|&v| v as f64 * w_scale)
                .collect();
            let acc = &mut self.accumulated[l];
            dh = (0..layer.rows())
                .map(|row| {
                    let a = &acc[row * cols..(row + 1) * cols];
                    let da = &step[row * cols..(row + 1) * cols];
                    let mut carried = 0.0;
                    let mut fresh = 0.0;
                    let mut cross = 0.0;
                    for c in 0..cols {
                        carried += a[c] * dh_sigma[c];
                        fresh += da[c] * sigma_h[c];
                        cross += da[c] * dh_sigma[c];
                    }
                    prune(carried + fresh + cross, h_min)
                })
                .collect();
            for (a, d) in acc.iter_mut().zip(&step) {
                *a += d;
            }
        }
        let out = self.hidden.last_mut().expect("output layer");
        for (acc, d) in out.iter_mut().zip(&dh) {
            *acc += d;
        }
        self.resolution = r;
        Ok(self.output())
    }

    /// Runs all remaining upgrades, returning each `Omega_r`.
    pub fn run(&mut self) -> Result<Vec<Vec<f64>>> {
        (self.resolution..self.resolutions())
            .map(|_| self.upgrade())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(e: &[i32]) -> PartitioningVector {
        PartitioningVector::new(e.to_vec()).unwrap()
    }

    fn identity_net() -> Network {
        let w = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        Network::new(vec![w], vec![], OutputMap::Identity).unwrap()
    }

    #[test]
    fn identity_network_reproduces_input() {
        let model = LayeredModel::new(identity_net(), pv(&[0, -1, -2]), vec![pv(&[1, 0, -1])], -10)
            .unwrap();
        let mut state = model.start(&[0.75, -0.5]).unwrap();
        let outs = state.run().unwrap();
        assert_eq!(outs.len(), 2);
        assert_eq!(outs[1], vec![0.75, -0.5]);
        assert!(matches!(state.upgrade(), Err(Error::AlreadyComplete(2))));
    }

    #[test]
    fn network_shape_validation() {
        let w0 = Matrix::zeros(3, 3);
        let bad = Matrix::zeros(1, 3);
        assert!(Network::new(
            vec![w0.clone(), bad],
            vec![HiddenActivation::Relu],
            OutputMap::Sigmoid
        )
        .is_err());
        assert!(Network::new(
            vec![w0.clone()],
            vec![HiddenActivation::Relu],
            OutputMap::Sigmoid
        )
        .is_err());
        let net = Network::new(
            vec![w0, Matrix::zeros(1, 4)],
            vec![HiddenActivation::Relu],
            OutputMap::Sigmoid,
        )
        .unwrap();
        assert_eq!(net.widths(), vec![2, 3, 1]);
    }

    #[test]
    fn model_validation() {
        let net = identity_net();
        assert!(matches!(
            LayeredModel::new(net.clone(), pv(&[0, -1, -2]), vec![pv(&[1, 0])], -10),
            Err(Error::MismatchedDepth { .. })
        ));
        assert!(LayeredModel::new(net.clone(), pv(&[0, -1]), vec![], -10).is_err());
        let model = LayeredModel::new(net, pv(&[0, -1]), vec![pv(&[1, 0])], -10).unwrap();
        assert!(matches!(
            model.start(&[0.5]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            model.start(&[0.5, 1.0]),
            Err(Error::ElementTooLarge { .. })
        ));
    }

    #[test]
    fn pruning_floors_toward_negative_infinity() {
        assert_eq!(prune(0.3, -2), 0.25);
        assert_eq!(prune(-0.3, -2), -0.5);
        assert_eq!(prune(-0.25, -2), -0.25);
        assert_eq!(prune(5.0, 1), 4.0);
    }

    #[test]
    fn hidden_relu_single_step() {
        // H1 = [x; 1] . [1, -0.5]; out = relu(H1) . 1
        let w0 = Matrix::from_rows(&[vec![1.0, -0.5]]).unwrap();
        let w1 = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let net = Network::new(
            vec![w0, w1],
            vec![HiddenActivation::Relu],
            OutputMap::Identity,
        )
        .unwrap();
        let model =
            LayeredModel::new(net.clone(), pv(&[1, 0, -1]), vec![pv(&[1, 0, -1]); 2], -20).unwrap();
        let mut state = model.start(&[1.5]).unwrap();
        let outs = state.run().unwrap();
        // r = 1: x = 1, bias component 0 (|-0.5| < 1), weight 1 -> H1 = 1, out = relu(1) * 1
        assert_eq!(outs[0], vec![1.0]);
        assert_eq!(outs[1], net.forward(&[1.5]).unwrap());
        assert_eq!(state.accumulated_weights(0), &[1.0, -0.5]);
        assert_eq!(state.pre_activation(1), &[1.0]);
    }
}
