//! Topology strategies: how hidden layers are connected at initialization and
//! whether they are rewired during training.

use std::fmt;

use rand::RngCore;

use super::config::AgentConfig;
use crate::error::{Error, Result};
use crate::evolution::{evolve_network, EvolutionDelta};
use crate::sparse::{er_mask_init, Learner, Mask};

pub trait TopologyStrategy: Send + Sync + fmt::Debug {
    /// Canonical name, used in output file names.
    fn name(&self) -> &'static str;

    /// Mask for hidden-input layer `layer` (every layer but the output).
    fn hidden_mask(&self, layer: usize, n_in: usize, n_out: usize, config: &AgentConfig, rng: &mut dyn RngCore) -> Mask;

    fn evolves(&self) -> bool {
        false
    }

    /// Rewires the hidden layers of `learner`. Called every evolution period.
    fn evolve(&self, _learner: &mut Learner, _eta: f64, _rng: &mut dyn RngCore) -> Vec<EvolutionDelta> {
        Vec::new()
    }
}

/// Plain TD3: every layer fully connected.
#[derive(Debug, Default, Clone, Copy)]
pub struct Dense;

impl TopologyStrategy for Dense {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn hidden_mask(&self, _layer: usize, n_in: usize, n_out: usize, _config: &AgentConfig, _rng: &mut dyn RngCore) -> Mask {
        Mask::dense(n_in, n_out)
    }
}

/// Erdős–Rényi topology drawn once and never changed.
#[derive(Debug, Default, Clone, Copy)]
pub struct StaticSparse;

impl TopologyStrategy for StaticSparse {
    fn name(&self) -> &'static str {
        "static"
    }

    fn hidden_mask(&self, layer: usize, n_in: usize, n_out: usize, config: &AgentConfig, rng: &mut dyn RngCore) -> Mask {
        er_mask_init(n_in, n_out, config.lambda_for(layer), rng)
    }
}

/// Erdős–Rényi topology rewired by magnitude removal and random growth.
#[derive(Debug, Default, Clone, Copy)]
pub struct DynamicSparse;

impl TopologyStrategy for DynamicSparse {
    fn name(&self) -> &'static str {
        "dynamic"
    }

    fn hidden_mask(&self, layer: usize, n_in: usize, n_out: usize, config: &AgentConfig, rng: &mut dyn RngCore) -> Mask {
        er_mask_init(n_in, n_out, config.lambda_for(layer), rng)
    }

    fn evolves(&self) -> bool {
        true
    }

    fn evolve(&self, learner: &mut Learner, eta: f64, rng: &mut dyn RngCore) -> Vec<EvolutionDelta> {
        evolve_network(&mut learner.net, &mut learner.opt.layers, eta, rng)
    }
}

type Factory = fn() -> Box<dyn TopologyStrategy>;

struct Entry {
    names: &'static [&'static str],
    make: Factory,
}

/// Name-keyed table of strategies.
pub struct StrategyRegistry {
    entries: Vec<Entry>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(&["dense", "td3"], || Box::new(Dense));
        r.register(&["static", "static-sparse", "static-td3"], || Box::new(StaticSparse));
        r.register(&["dynamic", "dynamic-sparse", "ds-td3"], || Box::new(DynamicSparse));
        r
    }

    /// The first name is canonical; the rest are accepted aliases.
    pub fn register(&mut self, names: &'static [&'static str], make: Factory) {
        self.entries.push(Entry { names, make });
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn TopologyStrategy>> {
        let name = name.trim().to_ascii_lowercase();
        self.entries
            .iter()
            .rev()
            .find(|e| e.names.contains(&name.as_str()))
            .map(|e| (e.make)())
            .ok_or(Error::UnknownMode(name))
    }

    pub fn canonical_names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.names[0]).collect()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
