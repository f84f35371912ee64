use rand::Rng;

use super::batch::Batch;
use super::layer::{Activation, LayerGradient, SparseLayer};
use super::mask::Mask;
use crate::error::{Error, Result};

/// Ordered stack of sparse layers. Hidden layers use ReLU; the output layer
/// is always dense.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<SparseLayer>,
    revision: u64,
}

/// Per-layer activations retained by [`Mlp::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    revision: u64,
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Batch>,
    pre: Vec<Batch>,
}

impl ForwardCache {
    pub fn output(&self) -> &Batch {
        self.activations.last().expect("cache holds the input")
    }

    pub fn input(&self) -> &Batch {
        &self.activations[0]
    }

    /// Pre-activation of layer `l`.
    pub fn pre_activation(&self, l: usize) -> &Batch {
        &self.pre[l]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    pub fn connection_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len()).sum()
    }
}

impl Mlp {
    pub fn from_layers(layers: Vec<SparseLayer>) -> Result<Self> {
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].n_out() != w[1].n_in() {
                return Err(Error::InvalidNetwork(format!(
                    "layer {i} emits {} features but layer {} expects {}",
                    w[0].n_out(),
                    i + 1,
                    w[1].n_in()
                )));
            }
        }
        if let Some(last) = layers.last() {
            if !last.mask().is_dense() {
                return Err(Error::InvalidNetwork("output layer must be dense".into()));
            }
        }
        Ok(Self { layers, revision: 0 })
    }

    /// Builds an MLP over `sizes` (input, hidden..., output). `hidden_mask`
    /// supplies the mask of each non-output layer; the output layer is dense.
    /// Each layer's mask is drawn before its weights.
    pub fn build<R, F>(sizes: &[usize], output: Activation, mut hidden_mask: F, rng: &mut R) -> Result<Self>
    where
        R: Rng + ?Sized,
        F: FnMut(usize, usize, usize, &mut R) -> Mask,
    {
        if sizes.len() < 2 {
            return Err(Error::InvalidNetwork("need at least input and output sizes".into()));
        }
        let last = sizes.len() - 2;
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (l, w) in sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let (mask, act) = if l == last {
                (Mask::dense(n_in, n_out), output)
            } else {
                (hidden_mask(l, n_in, n_out, rng), Activation::Relu)
            };
            let mut layer = SparseLayer::new(mask, act);
            layer.init_weights(rng);
            layers.push(layer);
        }
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[SparseLayer] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &SparseLayer {
        &self.layers[i]
    }

    /// Mutable access invalidates outstanding forward caches.
    pub fn layer_mut(&mut self, i: usize) -> &mut SparseLayer {
        self.revision += 1;
        &mut self.layers[i]
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [SparseLayer] {
        self.revision += 1;
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.n_in())
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_out())
    }

    /// Max magnitude of a Tanh-scaled output, `None` for other heads.
    pub fn output_scale(&self) -> Option<f64> {
        match self.layers.last()?.activation() {
            Activation::ScaledTanh(s) => Some(s),
            _ => None,
        }
    }

    /// Sum of active connections over all layers, biases excluded.
    pub fn connection_count(&self) -> usize {
        self.layers.iter().map(|l| l.connection_count()).sum()
    }

    pub fn bias_count(&self) -> usize {
        self.layers.iter().map(|l| l.n_out()).sum()
    }

    fn check_input(&self, input: &Batch) -> Result<()> {
        if input.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: input.dim(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &Batch) -> Result<(Batch, ForwardCache)> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        activations.push(input.clone());
        for layer in &self.layers {
            let (z, a) = layer.forward(activations.last().unwrap());
            pre.push(z);
            activations.push(a);
        }
        let cache = ForwardCache {
            revision: self.revision,
            activations,
            pre,
        };
        Ok((cache.output().clone(), cache))
    }

    /// Forward pass without retaining intermediates.
    pub fn predict(&self, input: &Batch) -> Result<Batch> {
        self.check_input(input)?;
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x).1;
        }
        Ok(x)
    }

    pub fn predict_one(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict(&Batch::from_vector(input))?.sample(0))
    }

    fn check_cache(&self, cache: &ForwardCache, grad_out: &Batch) -> Result<()> {
        if cache.revision != self.revision || cache.pre.len() != self.layers.len() {
            return Err(Error::StaleCache("network changed since the forward pass"));
        }
        let out = cache.output();
        if grad_out.dim() != out.dim() || grad_out.len() != out.len() {
            return Err(Error::StaleCache("output gradient shape differs from cached output"));
        }
        Ok(())
    }

    fn backprop(&self, cache: &ForwardCache, grad_out: &Batch, want_params: bool) -> Result<(Vec<LayerGradient>, Batch)> {
        self.check_cache(cache, grad_out)?;
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_out.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let (p, gi) = layer.backward(&cache.activations[l], &cache.pre[l], &g, want_params, true);
            if let Some(p) = p {
                grads.push(p);
            }
            g = gi.expect("input gradient requested");
        }
        grads.reverse();
        Ok((grads, g))
    }

    /// Gradients of every active connection and bias given `dL/d output`.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Batch) -> Result<Gradients> {
        self.check_cache(cache, grad_out)?;
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_out.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let (p, gi) = layer.backward(&cache.activations[l], &cache.pre[l], &g, true, l > 0);
            grads.push(p.expect("parameter gradient requested"));
            if let Some(gi) = gi {
                g = gi;
            }
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// `dL/d input`, skipping parameter gradients.
    pub fn input_gradient(&self, cache: &ForwardCache, grad_out: &Batch) -> Result<Batch> {
        Ok(self.backprop(cache, grad_out, false)?.1)
    }

    /// Parameter gradients together with `dL/d input`.
    pub fn backward_with_input(&self, cache: &ForwardCache, grad_out: &Batch) -> Result<(Gradients, Batch)> {
        let (layers, g) = self.backprop(cache, grad_out, true)?;
        Ok((Gradients { layers }, g))
    }
}
