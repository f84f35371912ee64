//! Flat `key = value` experiment files.

use std::collections::BTreeSet;
use std::path::Path;

use crate::agent::{AgentConfig, StrategyRegistry};
use crate::envs::EnvRegistry;
use crate::error::{Error, Result};

/// Everything a run needs besides the registries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub agent: AgentConfig,
    pub env: String,
    pub modes: Vec<String>,
    pub seeds: Vec<u64>,
    pub eval_every: u64,
    pub eval_episodes: usize,
    /// Defaults to the total step count, so the buffer keeps the whole history.
    pub buffer_capacity: Option<usize>,
    /// Keys given explicitly, as opposed to defaults or preset values.
    explicit: BTreeSet<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            agent: AgentConfig::default(),
            env: "pendulum".into(),
            modes: vec!["dynamic".into()],
            seeds: vec![0],
            eval_every: 1000,
            eval_episodes: 10,
            buffer_capacity: None,
            explicit: BTreeSet::new(),
        }
    }
}

pub const PRESETS: &[&str] = &[
    "desk",
    "full",
    "schedule-e200",
    "schedule-e500",
    "schedule-e1000",
    "schedule-e2000",
    "sparsity-25",
    "sparsity-50",
    "sparsity-80",
];

const KEYS: &[&str] = &[
    "preset",
    "mode",
    "env",
    "seeds",
    "steps",
    "warmup",
    "eval_every",
    "eval_episodes",
    "buffer_capacity",
    "gamma",
    "tau",
    "policy_delay",
    "evolution_period",
    "eta",
    "lambda1",
    "lambda2",
    "exploration_noise",
    "target_noise",
    "noise_clip",
    "batch_size",
    "lr",
    "weight_decay",
    "hidden",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "empty list"));
    }
    Ok(items)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::config(key, "unknown key"));
            }
            if pairs.iter().any(|(k, _): &(String, String)| *k == key) {
                return Err(Error::config(key, "given more than once"));
            }
            pairs.push((key, value));
        }
        let mut cfg = Self::default();
        if let Some((_, preset)) = pairs.iter().find(|(k, _)| k == "preset") {
            cfg.apply_preset(preset)?;
        }
        for (key, value) in pairs.iter().filter(|(k, _)| k != "preset") {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key as if it appeared in the file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let a = &mut self.agent;
        match key {
            "preset" => return self.apply_preset(value),
            "mode" => self.modes = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            "env" => self.env = value.to_string(),
            "seeds" => self.seeds = parse_list(key, value)?,
            "steps" => a.total_steps = parse_num(key, value)?,
            "warmup" => a.warmup_steps = parse_num(key, value)?,
            "eval_every" => self.eval_every = parse_num(key, value)?,
            "eval_episodes" => self.eval_episodes = parse_num(key, value)?,
            "buffer_capacity" => self.buffer_capacity = Some(parse_num(key, value)?),
            "gamma" => a.gamma = parse_num(key, value)?,
            "tau" => a.tau = parse_num(key, value)?,
            "policy_delay" => a.policy_delay = parse_num(key, value)?,
            "evolution_period" => a.evolution_period = parse_num(key, value)?,
            "eta" => a.eta = parse_num(key, value)?,
            "lambda1" => a.lambda1 = parse_num(key, value)?,
            "lambda2" => a.lambda2 = parse_num(key, value)?,
            "exploration_noise" => a.exploration_noise = parse_num(key, value)?,
            "target_noise" => a.target_noise = parse_num(key, value)?,
            "noise_clip" => a.noise_clip = parse_num(key, value)?,
            "batch_size" => a.batch_size = parse_num(key, value)?,
            "lr" => a.learning_rate = parse_num(key, value)?,
            "weight_decay" => a.weight_decay = parse_num(key, value)?,
            "hidden" => a.hidden = parse_list(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        let a = &mut self.agent;
        match name {
            "desk" => {
                a.total_steps = 30_000;
                a.warmup_steps = 1000;
                self.eval_every = 1000;
            }
            "full" => {
                a.total_steps = 1_000_000;
                a.warmup_steps = 25_000;
                self.eval_every = 5000;
            }
            "schedule-e200" => a.evolution_period = 200,
            "schedule-e500" => a.evolution_period = 500,
            "schedule-e1000" => a.evolution_period = 1000,
            "schedule-e2000" => a.evolution_period = 2000,
            // second-layer density 75%, 50%, 20%
            "sparsity-25" => a.lambda2 = 96.0,
            "sparsity-50" => a.lambda2 = 64.0,
            "sparsity-80" => a.lambda2 = 25.6,
            _ => return Err(Error::config("preset", format!("unknown preset `{name}`"))),
        }
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::config("mode", "no mode given"));
        }
        let strategies = StrategyRegistry::with_builtins();
        for m in &self.modes {
            strategies.create(m).map_err(|_| Error::config("mode", format!("unknown mode `{m}`")))?;
        }
        EnvRegistry::with_builtins()
            .get(&self.env)
            .map_err(|_| Error::config("env", format!("unknown environment `{}`", self.env)))?;
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "no seed given"));
        }
        if self.eval_every == 0 {
            return Err(Error::config("eval_every", "must be at least 1"));
        }
        if self.eval_episodes == 0 {
            return Err(Error::config("eval_episodes", "must be at least 1"));
        }
        if self.buffer_capacity == Some(0) {
            return Err(Error::config("buffer_capacity", "must be positive"));
        }
        if self.agent.warmup_steps >= self.agent.total_steps {
            return Err(Error::config("warmup", "must be smaller than steps"));
        }
        self.agent.validate()
    }

    /// Agent configuration for one mode on the configured environment.
    /// Returns it with warnings about keys the mode ignores.
    pub fn resolve(&self, mode: &str, envs: &EnvRegistry, strategies: &StrategyRegistry) -> Result<(AgentConfig, Vec<String>)> {
        let strategy = strategies.create(mode)?;
        let env = envs.get(&self.env)?;
        let spec = (env.make)().spec();
        let mut cfg = self.agent.clone();
        let mut warnings = Vec::new();
        cfg.mode = strategy.name().to_string();
        cfg.max_action = spec.max_action;
        if !self.is_explicit("lambda1") {
            cfg.lambda1 = env.lambda1;
        }
        if !strategy.evolves() {
            for key in ["eta", "evolution_period"] {
                if self.is_explicit(key) {
                    warnings.push(format!("`{key}` ignored: mode `{}` does not evolve", strategy.name()));
                }
            }
            cfg.eta = 0.0;
        }
        if strategy.name() == "dense" {
            for key in ["lambda1", "lambda2"] {
                if self.is_explicit(key) {
                    warnings.push(format!("`{key}` ignored: mode `dense` is fully connected"));
                }
            }
        }
        cfg.validate()?;
        Ok((cfg, warnings))
    }
}
