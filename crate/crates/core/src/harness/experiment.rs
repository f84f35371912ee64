//! Seeded training runs: learning-curve CSVs and a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::eval::{evaluate_policy, random_policy_return, EvalRecord};
use super::flops::{run_flops, step_flops, CostModel, FlopsReport};
use crate::agent::{Phase, StrategyRegistry, Td3Agent};
use crate::envs::EnvRegistry;
use crate::error::{Error, Result};
use crate::replay::{ReplayBuffer, Transition};
use crate::sparse::Mlp;

/// RNG streams per seed: agent, training environment, evaluation.
const ENV_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSize {
    pub layers: Vec<usize>,
    pub total: usize,
}

impl NetworkSize {
    fn of(net: &Mlp) -> Self {
        Self {
            layers: net.layers().iter().map(|l| l.connection_count()).collect(),
            total: net.connection_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityReport {
    pub actor: NetworkSize,
    pub critic1: NetworkSize,
    pub critic2: NetworkSize,
    pub total: usize,
    pub dense_total: usize,
    pub sparsity: f64,
}

pub fn sparsity_report(agent: &Td3Agent) -> SparsityReport {
    let actor = NetworkSize::of(&agent.actor().net);
    let critic1 = NetworkSize::of(&agent.critic1().net);
    let critic2 = NetworkSize::of(&agent.critic2().net);
    let total = actor.total + critic1.total + critic2.total;
    let dense_total = CostModel::dense(&agent.spec(), &agent.config().hidden).connections() as usize;
    SparsityReport {
        actor,
        critic1,
        critic2,
        total,
        dense_total,
        sparsity: 1.0 - total as f64 / dense_total as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: String,
    pub env: String,
    pub seed: u64,
    pub steps: u64,
    pub warmup: u64,
    pub evaluations: usize,
    /// Mean of the last (up to) ten evaluation means.
    pub final_performance: f64,
    pub best_mean_return: f64,
    pub random_policy_return: f64,
    pub flops: FlopsReport,
    pub sparsity: SparsityReport,
    pub csv: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub runs: Vec<RunSummary>,
}

/// Output of one training run, before anything is written.
#[derive(Debug)]
pub struct RunOutput {
    pub curve: Vec<EvalRecord>,
    pub summary: RunSummary,
    pub agent: Td3Agent,
}

pub fn csv_name(mode: &str, env: &str, seed: u64) -> String {
    format!("{mode}_{env}_seed{seed}.csv")
}

/// Trains one agent to completion.
pub fn run_single(
    cfg: &ExperimentConfig,
    mode: &str,
    seed: u64,
    envs: &EnvRegistry,
    strategies: &StrategyRegistry,
) -> Result<RunOutput> {
    let (agent_cfg, warnings) = cfg.resolve(mode, envs, strategies)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let strategy = strategies.create(mode)?;
    let mut env = envs.make(&cfg.env)?;
    let mut eval_env = envs.make(&cfg.env)?;
    let spec = env.spec();
    let mut agent = Td3Agent::new(agent_cfg.clone(), spec, strategy, seed)?;
    let mode_name = agent.strategy().name().to_string();

    let capacity = cfg.buffer_capacity.unwrap_or(agent_cfg.total_steps as usize);
    let mut buffer = ReplayBuffer::new(capacity);
    let mut env_rng = stream_rng(seed, ENV_STREAM);
    let mut state = env.reset(&mut env_rng);

    let model = CostModel::from_agent(&agent);
    let mut total_flops = 0u64;
    let mut curve = Vec::new();

    for step in 1..=agent_cfg.total_steps {
        let warm = step <= agent_cfg.warmup_steps;
        let action = agent.act(&state, if warm { Phase::Warmup } else { Phase::Explore })?;
        let r = env.step(&action)?;
        let transition = Transition {
            state: std::mem::take(&mut state),
            action,
            reward: r.reward,
            next_state: r.state.clone(),
            done: r.terminal,
        };
        if warm {
            buffer.store(transition);
        } else {
            let log = agent.train_iteration(&mut buffer, transition)?;
            total_flops += step_flops(
                &model,
                agent_cfg.batch_size,
                log.actor_loss.is_some(),
                log.critics_evolved,
                log.actor_evolved,
            );
        }
        state = if r.done() { env.reset(&mut env_rng) } else { r.state };

        if step % cfg.eval_every == 0 {
            let mut rng = stream_rng(seed, EVAL_STREAM);
            let mut rec = evaluate_policy(&agent.actor().net, eval_env.as_mut(), cfg.eval_episodes, &mut rng)?;
            rec.step = step;
            log::info!(
                "{mode_name} {} seed {seed} step {step}: return {:.1} ± {:.1}",
                cfg.env,
                rec.mean_return,
                rec.std_return
            );
            curve.push(rec);
        }
    }

    let dense_total = run_flops(&CostModel::dense(&spec, &agent_cfg.hidden), &agent_cfg, false);
    let random = random_policy_return(eval_env.as_mut(), cfg.eval_episodes, &mut stream_rng(seed, EVAL_STREAM))?;
    let last: Vec<f64> = curve.iter().rev().take(10).map(|r| r.mean_return).collect();
    let final_performance = if last.is_empty() {
        f64::NAN
    } else {
        last.iter().sum::<f64>() / last.len() as f64
    };
    let summary = RunSummary {
        mode: mode_name.clone(),
        env: cfg.env.clone(),
        seed,
        steps: agent_cfg.total_steps,
        warmup: agent_cfg.warmup_steps,
        evaluations: curve.len(),
        final_performance,
        best_mean_return: curve.iter().map(|r| r.mean_return).fold(f64::NEG_INFINITY, f64::max),
        random_policy_return: random.mean_return,
        flops: FlopsReport::new(&model, total_flops, dense_total),
        sparsity: sparsity_report(&agent),
        csv: csv_name(&mode_name, &cfg.env, seed),
        warnings,
    };
    Ok(RunOutput { curve, summary, agent })
}

pub fn write_curve(path: &Path, curve: &[EvalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "mean_return", "std_return"])?;
    for r in curve {
        w.write_record([r.step.to_string(), r.mean_return.to_string(), r.std_return.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Runs every (mode, seed) pair, writing one CSV per run and `summary.json`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let envs = EnvRegistry::with_builtins();
    let strategies = StrategyRegistry::with_builtins();
    let mut runs = Vec::new();
    for mode in &cfg.modes {
        for &seed in &cfg.seeds {
            let out = run_single(cfg, mode, seed, &envs, &strategies)?;
            write_curve(&out_dir.join(&out.summary.csv), &out.curve)?;
            runs.push(out.summary);
        }
    }
    let summary = ExperimentSummary { runs };
    let path: PathBuf = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}
