use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moments for one layer, parallel to its active connections and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerMoments {
    pub m_w: Vec<f64>,
    pub v_w: Vec<f64>,
    pub m_b: Vec<f64>,
    pub v_b: Vec<f64>,
}

impl LayerMoments {
    pub fn zeros(connections: usize, outputs: usize) -> Self {
        Self {
            m_w: vec![0.0; connections],
            v_w: vec![0.0; connections],
            m_b: vec![0.0; outputs],
            v_b: vec![0.0; outputs],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub layers: Vec<LayerMoments>,
    pub step: u64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerMoments::zeros(l.connection_count(), l.n_out()))
                .collect(),
            step: 0,
        }
    }

    /// True when every moment vector lines up with the network's active set.
    pub fn mirrors(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers().len()
            && self.layers.iter().zip(net.layers()).all(|(m, l)| {
                m.m_w.len() == l.connection_count()
                    && m.v_w.len() == l.connection_count()
                    && m.m_b.len() == l.n_out()
                    && m.v_b.len() == l.n_out()
            })
    }
}

#[inline]
fn update(p: &mut f64, g: f64, m: &mut f64, v: &mut f64, lr: f64, c1: f64, c2: f64) {
    *m = BETA1 * *m + (1.0 - BETA1) * g;
    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
    let m_hat = *m / c1;
    let v_hat = *v / c2;
    *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
}

/// One Adam step over the active connections and biases. Weight decay is
/// coupled (`g + decay * w`) and applies to connection weights only.
pub fn adam_step(net: &mut Mlp, state: &mut AdamState, grads: &Gradients, lr: f64, weight_decay: f64) -> Result<()> {
    if !state.mirrors(net)
        || grads.layers.len() != net.layers().len()
        || grads
            .layers
            .iter()
            .zip(net.layers())
            .any(|(g, l)| g.weights.len() != l.connection_count() || g.bias.len() != l.n_out())
    {
        return Err(Error::GradientMismatch);
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for ((layer, mom), g) in net.layers_mut().iter_mut().zip(&mut state.layers).zip(&grads.layers) {
        for i in 0..layer.weights.len() {
            let w = layer.weights[i];
            let gi = g.weights[i] + weight_decay * w;
            update(&mut layer.weights[i], gi, &mut mom.m_w[i], &mut mom.v_w[i], lr, c1, c2);
        }
        for k in 0..layer.bias.len() {
            update(&mut layer.bias[k], g.bias[k], &mut mom.m_b[k], &mut mom.v_b[k], lr, c1, c2);
        }
    }
    Ok(())
}
