//! Training cost accounting: multiply and add per connection, layer by layer.
//!
//! Per sample, a network's forward pass costs `2 * (connections + biases)`
//! and its backward pass twice that. Evolution and soft updates cost one
//! element operation per active connection of the networks involved.

use serde::Serialize;

use crate::agent::{AgentConfig, Td3Agent};
use crate::envs::EnvSpec;
use crate::sparse::Mlp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetworkCost {
    pub connections: u64,
    pub biases: u64,
}

impl NetworkCost {
    pub fn of(net: &Mlp) -> Self {
        Self {
            connections: net.connection_count() as u64,
            biases: net.bias_count() as u64,
        }
    }

    /// Fully connected network over `sizes`.
    pub fn dense(sizes: &[usize]) -> Self {
        Self {
            connections: sizes.windows(2).map(|w| (w[0] * w[1]) as u64).sum(),
            biases: sizes[1..].iter().map(|s| *s as u64).sum(),
        }
    }

    pub fn forward(&self) -> u64 {
        2 * (self.connections + self.biases)
    }

    pub fn backward(&self) -> u64 {
        2 * self.forward()
    }
}

/// Costs of the three trained networks; targets share their budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostModel {
    pub actor: NetworkCost,
    pub critic1: NetworkCost,
    pub critic2: NetworkCost,
}

impl CostModel {
    pub fn from_agent(agent: &Td3Agent) -> Self {
        Self {
            actor: NetworkCost::of(&agent.actor().net),
            critic1: NetworkCost::of(&agent.critic1().net),
            critic2: NetworkCost::of(&agent.critic2().net),
        }
    }

    /// Dense TD3 networks for the given environment shape.
    pub fn dense(spec: &EnvSpec, hidden: &[usize]) -> Self {
        let actor: Vec<usize> = [spec.state_dim].iter().chain(hidden).chain(&[spec.action_dim]).copied().collect();
        let critic: Vec<usize> = [spec.state_dim + spec.action_dim].iter().chain(hidden).chain(&[1]).copied().collect();
        Self {
            actor: NetworkCost::dense(&actor),
            critic1: NetworkCost::dense(&critic),
            critic2: NetworkCost::dense(&critic),
        }
    }

    pub fn connections(&self) -> u64 {
        self.actor.connections + self.critic1.connections + self.critic2.connections
    }
}

/// FLOPs of one training update.
pub fn step_flops(model: &CostModel, batch: usize, is_actor_step: bool, critics_evolved: bool, actor_evolved: bool) -> u64 {
    let n = batch as u64;
    let (a, c1, c2) = (&model.actor, &model.critic1, &model.critic2);
    // target actor and both target critics on s'
    let mut total = n * (a.forward() + c1.forward() + c2.forward());
    // both critics on (s, a), forward and backward
    total += n * (c1.forward() + c1.backward() + c2.forward() + c2.backward());
    if critics_evolved {
        total += c1.connections + c2.connections;
    }
    if is_actor_step {
        total += n * (a.forward() + c1.forward() + a.backward() + c1.backward());
        if actor_evolved {
            total += a.connections;
        }
        // soft update of the three targets
        total += model.connections();
    }
    total
}

/// FLOPs of one update of `agent` at its current size.
pub fn count_flops_step(agent: &Td3Agent, config: &AgentConfig, is_actor_step: bool, evolving: bool) -> u64 {
    step_flops(&CostModel::from_agent(agent), config.batch_size, is_actor_step, evolving, evolving && is_actor_step)
}

/// Total over a full run: `total_steps - warmup_steps` updates on the usual
/// delay and evolution schedule.
pub fn run_flops(model: &CostModel, config: &AgentConfig, evolves: bool) -> u64 {
    let updates = config.total_steps.saturating_sub(config.warmup_steps);
    (1..=updates)
        .map(|t| {
            let actor = t % config.policy_delay == 0;
            let evolve = evolves && t % config.evolution_period == 0;
            step_flops(model, config.batch_size, actor, evolve, evolve && actor)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlopsReport {
    pub actor_forward: u64,
    pub critic_forward: u64,
    pub total: u64,
    pub dense_total: u64,
    pub ratio: f64,
}

impl FlopsReport {
    pub fn new(model: &CostModel, total: u64, dense_total: u64) -> Self {
        Self {
            actor_forward: model.actor.forward(),
            critic_forward: model.critic1.forward(),
            total,
            dense_total,
            ratio: total as f64 / dense_total as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_costs() {
        let empty = NetworkCost { connections: 0, biases: 7 };
        assert_eq!(empty.forward(), 14);
        let layer = NetworkCost { connections: 17 * 256, biases: 0 };
        assert_eq!(layer.forward(), 8704);
        assert_eq!(layer.backward(), 17408);
    }

    #[test]
    fn dense_shapes() {
        let spec = EnvSpec {
            state_dim: 17,
            action_dim: 6,
            max_action: 1.0,
            step_limit: 1000,
        };
        let m = CostModel::dense(&spec, &[256, 256]);
        assert_eq!(m.actor.connections, 71424);
        assert_eq!(m.critic1.connections, 71680);
        assert_eq!(m.connections(), 214784);
        assert_eq!(m.actor.biases, 518);
    }

    #[test]
    fn run_total_matches_per_step_sum() {
        let spec = EnvSpec {
            state_dim: 3,
            action_dim: 1,
            max_action: 2.0,
            step_limit: 200,
        };
        let m = CostModel::dense(&spec, &[8, 8]);
        let cfg = AgentConfig {
            total_steps: 12,
            warmup_steps: 2,
            evolution_period: 4,
            ..Default::default()
        };
        let by_hand: u64 = (1..=10u64)
            .map(|t| step_flops(&m, 100, t % 2 == 0, t % 4 == 0, t % 4 == 0))
            .sum();
        assert_eq!(run_flops(&m, &cfg, true), by_hand);
        assert!(run_flops(&m, &cfg, false) < by_hand);
    }
}
