//! TD3 agents and the topology strategies they are trained under.

mod config;
mod strategy;
mod td3;

pub use config::AgentConfig;
pub use strategy::{Dense, DynamicSparse, StaticSparse, StrategyRegistry, TopologyStrategy};
pub use td3::{
    actor_gradients, compute_target, select_action, smoothing_noise, soft_update, update_actor, update_critic,
    update_critics, Budgets, Phase, StepLog, Targets, Td3Agent, TrainingBatch,
};
