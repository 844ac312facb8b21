//! Layer stack with forward and backward passes.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Softmax,
    Identity,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 1,
            Activation::Softmax => 2,
            Activation::Identity => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Activation::Relu),
            2 => Some(Activation::Softmax),
            3 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Fully connected layer, `out = act(x · W + b)` with `W` of shape
/// `[inputs × outputs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: Activation,
    pub frozen: bool,
}

impl DenseLayer {
    /// He-uniform weights, zero biases.
    pub fn he_uniform(inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = (6.0 / inputs as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        DenseLayer {
            weights: Matrix::from_vec(inputs, outputs, data),
            biases: vec![0.0; outputs],
            activation,
            frozen: false,
        }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        DenseLayer {
            weights: Matrix::zeros(inputs, outputs),
            biases: vec![0.0; outputs],
            activation,
            frozen: false,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.biases.len()
    }

    /// Pre-activation `x · W + b`.
    pub fn affine(&self, x: &Matrix) -> Matrix {
        let mut z = x.matmul(&self.weights);
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&self.biases) {
                *v += b;
            }
        }
        z
    }

    pub fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.biases.iter().all(|b| b.is_finite())
    }
}

pub fn relu_inplace(z: &mut Matrix) {
    z.map_inplace(|v| if v > 0.0 { v } else { 0.0 });
}

/// Row-wise numerically stable softmax.
pub fn softmax_inplace(z: &mut Matrix) {
    for r in 0..z.rows() {
        let row = z.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

fn activate(z: &mut Matrix, act: Activation) {
    match act {
        Activation::Relu => relu_inplace(z),
        Activation::Softmax => softmax_inplace(z),
        Activation::Identity => {}
    }
}

/// Gradients of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `inputs[l]` is the input of layer `l`; the last entry is the output.
    pub activations: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("cache holds the input")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
}

impl Network {
    /// Hidden layers use ReLU; the last layer gets `output`.
    pub fn init(widths: &[usize], output: Activation, seed: u64) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidInput("need at least input and output widths".into()));
        }
        if let Some(pos) = widths.iter().position(|&w| w == 0) {
            return Err(Error::InvalidInput(format!("layer width {pos} is zero")));
        }
        let mut rng = rng::rng(rng::derive(seed, "init"));
        let n = widths.len() - 1;
        let layers = (0..n)
            .map(|l| {
                let act = if l + 1 == n { output } else { Activation::Relu };
                DenseLayer::he_uniform(widths[l], widths[l + 1], act, &mut rng)
            })
            .collect();
        Ok(Network { layers })
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, DenseLayer::inputs)
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::outputs)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_width()];
        w.extend(self.layers.iter().map(DenseLayer::outputs));
        w
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::parameter_count).sum()
    }

    /// Consistent shapes, hidden activations not softmax, finite entries.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidInput("network has no layers".into()));
        }
        for (l, pair) in self.layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::InvalidInput(format!(
                    "layer {l} outputs {} but layer {} expects {}",
                    pair[0].outputs(),
                    l + 1,
                    pair[1].inputs()
                )));
            }
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.biases.len() != layer.outputs() {
                return Err(Error::InvalidInput(format!("layer {l} bias length")));
            }
            if l + 1 < self.layers.len() && layer.activation == Activation::Softmax {
                return Err(Error::InvalidInput(format!("hidden layer {l} uses softmax")));
            }
            if !layer.is_finite() {
                return Err(Error::NonFinite(format!("layer {l} parameters")));
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                actual: x.cols(),
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            let mut z = layer.affine(&a);
            activate(&mut z, layer.activation);
            a = z;
        }
        Ok(a)
    }

    /// Pre-activation of the last layer (logits for a softmax head).
    pub fn logits(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let n = self.layers.len();
        let mut a = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(&a);
            if l + 1 < n {
                activate(&mut z, layer.activation);
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: &Matrix) -> Result<ForwardCache> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let mut z = layer.affine(activations.last().expect("non-empty"));
            activate(&mut z, layer.activation);
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagate a gradient taken with respect to the last layer's
    /// pre-activation. Returns per-layer gradients (`None` for frozen layers,
    /// whose gradients are never needed) and, on request, the gradient with
    /// respect to the network input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_logits: Matrix,
        want_input_grad: bool,
    ) -> (Vec<Option<LayerGrad>>, Option<Matrix>) {
        let n = self.layers.len();
        let mut grads: Vec<Option<LayerGrad>> = vec![None; n];
        let mut dz = grad_logits;
        let lowest_trainable = self.layers.iter().position(|l| !l.frozen);
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let input = &cache.activations[l];
            if !layer.frozen {
                let dw = input.t_matmul(&dz);
                let mut db = vec![0.0; layer.outputs()];
                for row in dz.iter_rows() {
                    for (b, g) in db.iter_mut().zip(row) {
                        *b += g;
                    }
                }
                grads[l] = Some(LayerGrad { weights: dw, biases: db });
            }
            let needed_below = if l == 0 {
                want_input_grad
            } else {
                want_input_grad || lowest_trainable.is_some_and(|t| t < l)
            };
            if !needed_below {
                break;
            }
            let mut dx = dz.matmul_t(&layer.weights);
            if l > 0 {
                match self.layers[l - 1].activation {
                    Activation::Relu => {
                        for (g, a) in dx.as_mut_slice().iter_mut().zip(input.as_slice()) {
                            if *a <= 0.0 {
                                *g = 0.0;
                            }
                        }
                    }
                    Activation::Identity => {}
                    Activation::Softmax => unreachable!("validated: no hidden softmax"),
                }
            }
            dz = dx;
            if l == 0 {
                return (grads, Some(dz));
            }
        }
        (grads, None)
    }
}

/// Adam with bias-corrected moments; frozen layers are skipped entirely.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<LayerGrad>,
    v: Vec<LayerGrad>,
}

impl Adam {
    pub fn new(net: &Network, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<LayerGrad> = net
            .layers
            .iter()
            .map(|l| LayerGrad {
                weights: Matrix::zeros(l.inputs(), l.outputs()),
                biases: vec![0.0; l.outputs()],
            })
            .collect();
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step(&mut self, net: &mut Network, grads: &[Option<LayerGrad>]) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.epsilon, self.learning_rate);
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let mhat = *m / c1;
                let vhat = *v / c2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
            }
        };
        for (l, layer) in net.layers.iter_mut().enumerate() {
            if layer.frozen {
                continue;
            }
            let Some(g) = &grads[l] else { continue };
            update(
                layer.weights.as_mut_slice(),
                g.weights.as_slice(),
                self.m[l].weights.as_mut_slice(),
                self.v[l].weights.as_mut_slice(),
            );
            update(
                &mut layer.biases,
                &g.biases,
                &mut self.m[l].biases,
                &mut self.v[l].biases,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_rejected() {
        assert!(Network::init(&[3, 0, 5], Activation::Softmax, 1).is_err());
        assert!(Network::init(&[3], Activation::Softmax, 1).is_err());
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let mut z = Matrix::zeros(2, 5);
        softmax_inplace(&mut z);
        assert!(z.as_slice().iter().all(|&p| (p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn softmax_is_stable_for_large_logits() {
        let mut z = Matrix::from_rows(&[vec![1000.0, 1001.0, -1000.0]]);
        softmax_inplace(&mut z);
        assert!(z.is_finite());
        assert!((z.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_layers_get_no_gradient() {
        let mut net = Network::init(&[2, 3, 2], Activation::Softmax, 3).unwrap();
        net.layers[1].frozen = true;
        let x = Matrix::from_rows(&[vec![0.5, -1.0]]);
        let cache = net.forward_cached(&x).unwrap();
        let (g, dx) = net.backward(&cache, Matrix::from_rows(&[vec![0.1, -0.1]]), false);
        assert!(g[1].is_none());
        assert!(g[0].is_some());
        assert!(dx.is_none());
    }
}
