//! Sparse-from-scratch TD3 agents with evolving network topology.
//!
//! The actor and both critics are multilayer perceptrons whose hidden layers
//! hold only a fixed budget of connections. Under the dynamic mode the
//! connectivity is rewired periodically (magnitude removal, random zero
//! growth) and target networks are pruned back to their budget after every
//! soft update. Dense TD3 and a static-sparse baseline are selected through the
//! same [`agent::StrategyRegistry`].

pub mod agent;
pub mod envs;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod replay;
pub mod sparse;

pub use error::{Error, Result};
