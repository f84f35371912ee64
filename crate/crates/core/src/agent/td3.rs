//! TD3 with pluggable topology: twin critics, delayed policy updates, target
//! smoothing, soft target updates followed by budget pruning.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::AgentConfig;
use super::strategy::TopologyStrategy;
use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::evolution::{prune_to_budget, EvolutionDelta};
use crate::replay::{ReplayBuffer, Transition};
use crate::sparse::{Activation, Batch, Connection, Learner, Mask, Mlp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Uniform random actions while the buffer fills.
    Warmup,
    /// Policy plus Gaussian exploration noise.
    Explore,
    /// Noise-free policy, used for evaluation.
    Greedy,
}

/// Picks an action for one state. `noise_std` is absolute (already scaled
/// by the action range).
pub fn select_action<R: Rng + ?Sized>(
    actor: &Mlp,
    state: &[f64],
    noise_std: f64,
    max_action: f64,
    phase: Phase,
    rng: &mut R,
) -> Result<Vec<f64>> {
    match phase {
        Phase::Warmup => Ok((0..actor.output_dim())
            .map(|_| rng.random_range(-max_action..=max_action))
            .collect()),
        Phase::Greedy => actor.predict_one(state),
        Phase::Explore => {
            let mut a = actor.predict_one(state)?;
            for v in &mut a {
                let n: f64 = rng.sample(StandardNormal);
                *v = (*v + noise_std * n).clamp(-max_action, max_action);
            }
            Ok(a)
        }
    }
}

/// A sampled mini-batch in feature-major layout.
#[derive(Debug, Clone)]
pub struct TrainingBatch {
    pub states: Batch,
    pub actions: Batch,
    pub rewards: Vec<f64>,
    pub next_states: Batch,
    pub dones: Vec<bool>,
}

impl TrainingBatch {
    pub fn from_transitions(items: &[&Transition]) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyBuffer)?;
        let (sd, ad) = (first.state.len(), first.action.len());
        let states: Vec<&[f64]> = items.iter().map(|t| t.state.as_slice()).collect();
        let actions: Vec<&[f64]> = items.iter().map(|t| t.action.as_slice()).collect();
        let next: Vec<&[f64]> = items.iter().map(|t| t.next_state.as_slice()).collect();
        Ok(Self {
            states: Batch::from_samples(sd, &states)?,
            actions: Batch::from_samples(ad, &actions)?,
            rewards: items.iter().map(|t| t.reward).collect(),
            next_states: Batch::from_samples(sd, &next)?,
            dones: items.iter().map(|t| t.done).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Borrowed target networks.
#[derive(Debug, Clone, Copy)]
pub struct Targets<'a> {
    pub actor: &'a Mlp,
    pub critic1: &'a Mlp,
    pub critic2: &'a Mlp,
}

/// Clipped double-Q target with smoothed target actions. Noise is drawn
/// sample by sample, one value per action dimension.
pub fn compute_target<R: Rng + ?Sized>(
    next_states: &Batch,
    rewards: &[f64],
    dones: &[bool],
    targets: Targets<'_>,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = next_states.len();
    if n == 0 {
        return Err(Error::EmptyBuffer);
    }
    let mut actions = targets.actor.predict(next_states)?;
    let max = config.max_action;
    for b in 0..n {
        for d in 0..actions.dim() {
            let eps = smoothing_noise(config.target_noise, config.noise_clip, rng);
            actions.set(d, b, (actions.get(d, b) + eps).clamp(-max, max));
        }
    }
    let input = Batch::concat(next_states, &actions)?;
    let q1 = targets.critic1.predict(&input)?;
    let q2 = targets.critic2.predict(&input)?;
    Ok((0..n)
        .map(|b| {
            let not_done = if dones[b] { 0.0 } else { 1.0 };
            rewards[b] + config.gamma * not_done * q1.get(0, b).min(q2.get(0, b))
        })
        .collect())
}

/// `clip(N(0, std), -clip, clip)`
pub fn smoothing_noise<R: Rng + ?Sized>(std: f64, clip: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    (std * n).clamp(-clip, clip)
}

/// One Adam step on `mean((Q(s, a) - y)^2)`. Returns the loss before the step.
pub fn update_critic(critic: &mut Learner, input: &Batch, y: &[f64], config: &AgentConfig) -> Result<f64> {
    let n = y.len() as f64;
    let (q, cache) = critic.net.forward(input)?;
    let mut grad = Batch::zeros(1, y.len());
    let mut loss = 0.0;
    for (b, yb) in y.iter().enumerate() {
        let err = q.get(0, b) - yb;
        loss += err * err;
        grad.set(0, b, 2.0 * err / n);
    }
    let grads = critic.net.backward(&cache, &grad)?;
    critic.step(&grads, config.learning_rate, config.weight_decay)?;
    Ok(loss / n)
}

pub fn update_critics(
    batch: &TrainingBatch,
    y: &[f64],
    critic1: &mut Learner,
    critic2: &mut Learner,
    config: &AgentConfig,
) -> Result<[f64; 2]> {
    let input = Batch::concat(&batch.states, &batch.actions)?;
    Ok([
        update_critic(critic1, &input, y, config)?,
        update_critic(critic2, &input, y, config)?,
    ])
}

/// Gradient of `-mean Q1(s, pi(s))` with respect to the actor parameters.
pub fn actor_gradients(actor: &Mlp, critic1: &Mlp, states: &Batch) -> Result<(crate::sparse::Gradients, f64)> {
    let n = states.len();
    let (actions, actor_cache) = actor.forward(states)?;
    let input = Batch::concat(states, &actions)?;
    let (q, critic_cache) = critic1.forward(&input)?;
    let mut grad_q = Batch::zeros(1, n);
    grad_q.as_mut_slice().fill(-1.0 / n as f64);
    let d_input = critic1.input_gradient(&critic_cache, &grad_q)?;
    let d_actions = d_input.rows(states.dim(), actions.dim());
    let grads = actor.backward(&actor_cache, &d_actions)?;
    let loss = -q.as_slice().iter().sum::<f64>() / n as f64;
    Ok((grads, loss))
}

/// Deterministic policy gradient step through the first critic only.
pub fn update_actor(states: &Batch, actor: &mut Learner, critic1: &Mlp, config: &AgentConfig) -> Result<f64> {
    let (grads, loss) = actor_gradients(&actor.net, critic1, states)?;
    actor.step(&grads, config.learning_rate, config.weight_decay)?;
    Ok(loss)
}

/// `target <- tau * current + (1 - tau) * target` over the union of both
/// active sets (absent entries read as zero), then each layer is pruned back
/// to `budgets[l]` connections by magnitude.
pub fn soft_update(target: &mut Mlp, current: &Mlp, tau: f64, budgets: &[usize]) {
    for (l, (t, c)) in target.layers_mut().iter_mut().zip(current.layers()).enumerate() {
        let (tp, cp) = (t.mask.pairs(), c.mask.pairs());
        let mut pairs: Vec<Connection> = Vec::with_capacity(tp.len().max(cp.len()));
        let mut weights = Vec::with_capacity(pairs.capacity());
        let (mut i, mut j) = (0, 0);
        while i < tp.len() || j < cp.len() {
            let take_t = j == cp.len() || (i < tp.len() && tp[i] <= cp[j]);
            let take_c = i == tp.len() || (j < cp.len() && cp[j] <= tp[i]);
            let tv = if take_t { t.weights[i] } else { 0.0 };
            let cv = if take_c { c.weights[j] } else { 0.0 };
            pairs.push(if take_t { tp[i] } else { cp[j] });
            weights.push(tau * cv + (1.0 - tau) * tv);
            if take_t {
                i += 1;
            }
            if take_c {
                j += 1;
            }
        }
        t.mask = Mask::from_sorted(t.n_in(), t.n_out(), pairs);
        t.weights = weights;
        for (tb, cb) in t.bias.iter_mut().zip(&c.bias) {
            *tb = tau * cb + (1.0 - tau) * *tb;
        }
        prune_to_budget(t, budgets[l]);
    }
}

/// What happened during one training update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLog {
    pub step: u64,
    pub critic_losses: [f64; 2],
    pub actor_loss: Option<f64>,
    pub critics_evolved: bool,
    pub actor_evolved: bool,
    /// Connections replaced across all evolved layers this step.
    pub rewired: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets {
    pub actor: Vec<usize>,
    pub critic1: Vec<usize>,
    pub critic2: Vec<usize>,
}

fn layer_counts(net: &Mlp) -> Vec<usize> {
    net.layers().iter().map(|l| l.connection_count()).collect()
}

/// Networks, optimizer state, targets and schedule counter of one agent.
///
/// The agent owns a single RNG stream. Construction draws the actor, then
/// critic 1, then critic 2 (per layer: mask, weights, biases). Each update
/// then draws the batch indices, the target smoothing noise and, on
/// evolution steps, the growth positions.
#[derive(Debug)]
pub struct Td3Agent {
    config: AgentConfig,
    spec: EnvSpec,
    strategy: Box<dyn TopologyStrategy>,
    actor: Learner,
    critic1: Learner,
    critic2: Learner,
    actor_target: Mlp,
    critic1_target: Mlp,
    critic2_target: Mlp,
    budgets: Budgets,
    updates: u64,
    rng: ChaCha8Rng,
}

impl Td3Agent {
    pub fn new(config: AgentConfig, spec: EnvSpec, strategy: Box<dyn TopologyStrategy>, seed: u64) -> Result<Self> {
        config.validate()?;
        if !strategy.evolves() && config.eta > 0.0 {
            return Err(Error::config(
                "eta",
                format!("mode `{}` never evolves; eta must be 0", strategy.name()),
            ));
        }
        if (config.max_action - spec.max_action).abs() > 0.0 {
            return Err(Error::config("max_action", "must match the environment action bound"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor_sizes: Vec<usize> = std::iter::once(spec.state_dim)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(spec.action_dim))
            .collect();
        let critic_sizes: Vec<usize> = std::iter::once(spec.state_dim + spec.action_dim)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let build = |sizes: &[usize], out: Activation, rng: &mut ChaCha8Rng| {
            Mlp::build(
                sizes,
                out,
                |l, n_in, n_out, rng: &mut ChaCha8Rng| strategy.hidden_mask(l, n_in, n_out, &config, rng as &mut dyn RngCore),
                rng,
            )
        };
        let actor = build(&actor_sizes, Activation::ScaledTanh(spec.max_action), &mut rng)?;
        let critic1 = build(&critic_sizes, Activation::Linear, &mut rng)?;
        let critic2 = build(&critic_sizes, Activation::Linear, &mut rng)?;
        let budgets = Budgets {
            actor: layer_counts(&actor),
            critic1: layer_counts(&critic1),
            critic2: layer_counts(&critic2),
        };
        Ok(Self {
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor: Learner::new(actor),
            critic1: Learner::new(critic1),
            critic2: Learner::new(critic2),
            config,
            spec,
            strategy,
            budgets,
            updates: 0,
            rng,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn spec(&self) -> EnvSpec {
        self.spec
    }

    pub fn strategy(&self) -> &dyn TopologyStrategy {
        self.strategy.as_ref()
    }

    pub fn actor(&self) -> &Learner {
        &self.actor
    }

    pub fn critic1(&self) -> &Learner {
        &self.critic1
    }

    pub fn critic2(&self) -> &Learner {
        &self.critic2
    }

    pub fn targets(&self) -> Targets<'_> {
        Targets {
            actor: &self.actor_target,
            critic1: &self.critic1_target,
            critic2: &self.critic2_target,
        }
    }

    /// Per-layer connection budgets, fixed at construction.
    pub fn budgets(&self) -> &Budgets {
        &self.budgets
    }

    /// Number of training updates performed so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn act(&mut self, state: &[f64], phase: Phase) -> Result<Vec<f64>> {
        let std = self.config.exploration_noise * self.config.max_action;
        select_action(&self.actor.net, state, std, self.config.max_action, phase, &mut self.rng)
    }

    /// Stores `transition`, then performs one training update.
    pub fn train_iteration(&mut self, buffer: &mut ReplayBuffer, transition: Transition) -> Result<StepLog> {
        buffer.store(transition);
        self.train_step(buffer)
    }

    /// One iteration of the training loop body, without the store.
    pub fn train_step(&mut self, buffer: &ReplayBuffer) -> Result<StepLog> {
        self.updates += 1;
        let t = self.updates;
        let cfg = &self.config;

        let items = buffer.sample_batch(cfg.batch_size, &mut self.rng)?;
        let batch = TrainingBatch::from_transitions(&items)?;
        let targets = Targets {
            actor: &self.actor_target,
            critic1: &self.critic1_target,
            critic2: &self.critic2_target,
        };
        let y = compute_target(&batch.next_states, &batch.rewards, &batch.dones, targets, cfg, &mut self.rng)?;
        let critic_losses = update_critics(&batch, &y, &mut self.critic1, &mut self.critic2, cfg)?;

        let evolve_now = self.strategy.evolves() && t.is_multiple_of(cfg.evolution_period);
        let mut rewired = 0;
        let count = |d: &[EvolutionDelta]| d.iter().map(|x| x.removed.len()).sum::<usize>();
        if evolve_now {
            rewired += count(&self.strategy.evolve(&mut self.critic1, cfg.eta, &mut self.rng));
            rewired += count(&self.strategy.evolve(&mut self.critic2, cfg.eta, &mut self.rng));
        }

        let mut actor_loss = None;
        let mut actor_evolved = false;
        if t.is_multiple_of(cfg.policy_delay) {
            actor_loss = Some(update_actor(&batch.states, &mut self.actor, &self.critic1.net, cfg)?);
            if evolve_now {
                rewired += count(&self.strategy.evolve(&mut self.actor, cfg.eta, &mut self.rng));
                actor_evolved = true;
            }
            self.soft_update_targets();
        }
        Ok(StepLog {
            step: t,
            critic_losses,
            actor_loss,
            critics_evolved: evolve_now,
            actor_evolved,
            rewired,
        })
    }

    pub fn soft_update_targets(&mut self) {
        let tau = self.config.tau;
        soft_update(&mut self.critic1_target, &self.critic1.net, tau, &self.budgets.critic1);
        soft_update(&mut self.critic2_target, &self.critic2.net, tau, &self.budgets.critic2);
        soft_update(&mut self.actor_target, &self.actor.net, tau, &self.budgets.actor);
    }

    /// Test hook: replace the current and target networks wholesale.
    #[doc(hidden)]
    pub fn networks_mut(&mut self) -> (&mut Learner, &mut Learner, &mut Learner, [&mut Mlp; 3]) {
        (
            &mut self.actor,
            &mut self.critic1,
            &mut self.critic2,
            [&mut self.actor_target, &mut self.critic1_target, &mut self.critic2_target],
        )
    }
}
