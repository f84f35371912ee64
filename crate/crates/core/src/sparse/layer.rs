use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::batch::Batch;
use super::kernels;
use super::mask::{Connection, Mask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    /// `scale * tanh(z)`
    ScaledTanh(f64),
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::ScaledTanh(s) => s * z.tanh(),
            Activation::Linear => z,
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::ScaledTanh(s) => {
                let t = z.tanh();
                s * (1.0 - t * t)
            }
            Activation::Linear => 1.0,
        }
    }
}

/// Masked weights plus a dense bias. `weights[i]` belongs to `mask.pairs()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLayer {
    pub(crate) mask: Mask,
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
    pub(crate) activation: Activation,
}

impl SparseLayer {
    /// Zero weights and biases over the given mask.
    pub fn new(mask: Mask, activation: Activation) -> Self {
        let weights = vec![0.0; mask.len()];
        let bias = vec![0.0; mask.n_out()];
        Self {
            mask,
            weights,
            bias,
            activation,
        }
    }

    /// Fan-in uniform init: every active weight and every bias from
    /// `U[-1/sqrt(n_in), 1/sqrt(n_in)]`, weights first in mask order.
    pub fn init_weights<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let bound = 1.0 / (self.n_in() as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        for w in &mut self.weights {
            *w = dist.sample(rng);
        }
        for b in &mut self.bias {
            *b = dist.sample(rng);
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>, bias: Vec<f64>) -> Self {
        assert_eq!(weights.len(), self.mask.len(), "one weight per active pair");
        assert_eq!(bias.len(), self.mask.n_out(), "one bias per output");
        self.weights = weights;
        self.bias = bias;
        self
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn n_in(&self) -> usize {
        self.mask.n_in()
    }

    pub fn n_out(&self) -> usize {
        self.mask.n_out()
    }

    pub fn connection_count(&self) -> usize {
        self.mask.len()
    }

    pub fn weight_at(&self, input: usize, output: usize) -> f64 {
        self.mask
            .position(Connection::new(input, output))
            .map_or(0.0, |i| self.weights[i])
    }

    /// Effective row-major `n_in x n_out` matrix with zeros off the mask.
    pub fn dense_weights(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.mask.capacity()];
        for (c, w) in self.mask.pairs().iter().zip(&self.weights) {
            out[c.input * self.n_out() + c.output] = *w;
        }
        out
    }

    /// Returns `(pre-activation, activation)`.
    pub(crate) fn forward(&self, input: &Batch) -> (Batch, Batch) {
        let n = input.len();
        let mut pre = Batch::zeros(self.n_out(), n);
        let pairs = self.mask.pairs();
        let mut col_w = Vec::with_capacity(pairs.len());
        let mut col_in = Vec::with_capacity(pairs.len());
        let mut offsets = Vec::with_capacity(self.n_out() + 1);
        offsets.push(0);
        for k in 0..self.n_out() {
            for &i in self.mask.column(k) {
                col_w.push(self.weights[i as usize]);
                col_in.push(pairs[i as usize].input);
            }
            offsets.push(col_w.len());
        }
        kernels::gather_rows(pre.as_mut_slice(), &self.bias, &offsets, &col_w, &col_in, input.as_slice(), n);
        let mut out = pre.clone();
        let act = self.activation;
        for v in out.as_mut_slice() {
            *v = act.apply(*v);
        }
        (pre, out)
    }

    /// Back-propagates `grad_out` through the activation. Returns the
    /// weight and bias gradients when `want_params`, and the input gradient
    /// when `want_input`.
    pub(crate) fn backward(
        &self,
        input: &Batch,
        pre: &Batch,
        grad_out: &Batch,
        want_params: bool,
        want_input: bool,
    ) -> (Option<LayerGradient>, Option<Batch>) {
        let act = self.activation;
        let mut delta = grad_out.clone();
        for (d, z) in delta.as_mut_slice().iter_mut().zip(pre.as_slice()) {
            *d *= act.derivative(*z);
        }
        let params = want_params.then(|| LayerGradient {
            weights: self
                .mask
                .pairs()
                .iter()
                .map(|c| kernels::dot(input.row(c.input), delta.row(c.output)))
                .collect(),
            bias: (0..self.n_out()).map(|k| kernels::sum(delta.row(k))).collect(),
        });
        let input_grad = want_input.then(|| {
            let mut g = Batch::zeros(self.n_in(), input.len());
            let outputs: Vec<usize> = self.mask.pairs().iter().map(|c| c.output).collect();
            let offsets: Vec<usize> = (0..=self.n_in()).map(|j| self.mask.row_start(j)).collect();
            let zeros = vec![0.0; self.n_in()];
            kernels::gather_rows(g.as_mut_slice(), &zeros, &offsets, &self.weights, &outputs, delta.as_slice(), input.len());
            g
        });
        (params, input_grad)
    }
}

/// Gradient for one layer: one entry per active connection, one per bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}
