//! Truly sparse MLPs: masks, layers, backprop and Adam over active connections.

mod adam;
mod batch;
pub mod kernels;
mod layer;
mod mask;
mod mlp;

pub use adam::{adam_step, AdamState, LayerMoments, BETA1, BETA2, EPSILON};
pub use batch::Batch;
pub use layer::{Activation, LayerGradient, SparseLayer};
pub use mask::{er_connection_count, er_mask_init, Connection, Mask};
pub use mlp::{ForwardCache, Gradients, Mlp};

/// A network together with its optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    pub net: Mlp,
    pub opt: AdamState,
}

impl Learner {
    pub fn new(net: Mlp) -> Self {
        let opt = AdamState::new(&net);
        Self { net, opt }
    }

    pub fn step(&mut self, grads: &Gradients, lr: f64, weight_decay: f64) -> crate::Result<()> {
        adam_step(&mut self.net, &mut self.opt, grads, lr, weight_decay)
    }
}
