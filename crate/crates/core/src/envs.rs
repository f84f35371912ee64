//! Built-in continuous-control environments, selected by name.

use std::f64::consts::PI;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_dim: usize,
    pub max_action: f64,
    pub step_limit: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: Vec<f64>,
    pub reward: f64,
    /// Environment-terminal: the agent must not bootstrap past this step.
    pub terminal: bool,
    /// Time limit reached. Never implies `terminal`.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

pub trait Environment: Send {
    fn name(&self) -> &'static str;
    fn spec(&self) -> EnvSpec;
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;
    /// Actions outside `±max_action` are clipped.
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Torque-controlled pendulum swing-up.
#[derive(Debug, Clone)]
pub struct Pendulum {
    theta: f64,
    theta_dot: f64,
    steps: usize,
    finished: bool,
}

impl Pendulum {
    pub const G: f64 = 10.0;
    pub const MASS: f64 = 1.0;
    pub const LENGTH: f64 = 1.0;
    pub const DT: f64 = 0.05;
    pub const MAX_SPEED: f64 = 8.0;
    pub const MAX_TORQUE: f64 = 2.0;
    pub const STEP_LIMIT: usize = 200;

    pub fn new() -> Self {
        Self::with_state(0.0, 0.0)
    }

    pub fn with_state(theta: f64, theta_dot: f64) -> Self {
        Self {
            theta,
            theta_dot,
            steps: 0,
            finished: false,
        }
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }

    /// Worst possible one-step reward.
    pub fn min_reward() -> f64 {
        -(PI * PI + 0.1 * Self::MAX_SPEED * Self::MAX_SPEED + 0.001 * Self::MAX_TORQUE * Self::MAX_TORQUE)
    }
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Pendulum {
    fn name(&self) -> &'static str {
        "pendulum"
    }

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: 3,
            action_dim: 1,
            max_action: Self::MAX_TORQUE,
            step_limit: Self::STEP_LIMIT,
        }
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.theta = rng.random_range(-PI..PI);
        self.theta_dot = rng.random_range(-1.0..1.0);
        self.steps = 0;
        self.finished = false;
        self.observation()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        let u = action[0].clamp(-Self::MAX_TORQUE, Self::MAX_TORQUE);
        let (th, thdot) = (self.theta, self.theta_dot);
        let reward = -(wrap_angle(th).powi(2) + 0.1 * thdot * thdot + 0.001 * u * u);

        let acc = 3.0 * Self::G / (2.0 * Self::LENGTH) * th.sin() + 3.0 / (Self::MASS * Self::LENGTH * Self::LENGTH) * u;
        self.theta_dot = (thdot + acc * Self::DT).clamp(-Self::MAX_SPEED, Self::MAX_SPEED);
        self.theta = th + self.theta_dot * Self::DT;
        self.steps += 1;

        let truncated = self.steps >= Self::STEP_LIMIT;
        self.finished = truncated;
        Ok(StepResult {
            state: self.observation(),
            reward,
            terminal: false,
            truncated,
        })
    }
}

/// Continuous mountain car: drive an underpowered car up the right hill.
#[derive(Debug, Clone)]
pub struct MountainCar {
    position: f64,
    velocity: f64,
    steps: usize,
    finished: bool,
}

impl MountainCar {
    pub const MIN_POSITION: f64 = -1.2;
    pub const MAX_POSITION: f64 = 0.6;
    pub const MAX_SPEED: f64 = 0.07;
    pub const GOAL_POSITION: f64 = 0.45;
    pub const POWER: f64 = 0.0015;
    pub const STEP_LIMIT: usize = 999;

    pub fn new() -> Self {
        Self::with_state(-0.5, 0.0)
    }

    pub fn with_state(position: f64, velocity: f64) -> Self {
        Self {
            position,
            velocity,
            steps: 0,
            finished: false,
        }
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![self.position, self.velocity]
    }
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for MountainCar {
    fn name(&self) -> &'static str {
        "mountaincar"
    }

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: 2,
            action_dim: 1,
            max_action: 1.0,
            step_limit: Self::STEP_LIMIT,
        }
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.position = rng.random_range(-0.6..-0.4);
        self.velocity = 0.0;
        self.steps = 0;
        self.finished = false;
        self.observation()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        let u = action[0].clamp(-1.0, 1.0);
        self.velocity = (self.velocity + u * Self::POWER - 0.0025 * (3.0 * self.position).cos())
            .clamp(-Self::MAX_SPEED, Self::MAX_SPEED);
        self.position = (self.position + self.velocity).clamp(Self::MIN_POSITION, Self::MAX_POSITION);
        if self.position <= Self::MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        self.steps += 1;

        let terminal = self.position >= Self::GOAL_POSITION;
        let mut reward = -0.1 * u * u;
        if terminal {
            reward += 100.0;
        }
        let truncated = !terminal && self.steps >= Self::STEP_LIMIT;
        self.finished = terminal || truncated;
        Ok(StepResult {
            state: self.observation(),
            reward,
            terminal,
            truncated,
        })
    }
}

/// A registered environment: constructor plus its first-layer sparsity control.
#[derive(Clone, Copy)]
pub struct EnvEntry {
    pub name: &'static str,
    pub make: fn() -> Box<dyn Environment>,
    /// ER control for the input layers of actor and critics. Chosen per
    /// environment because it depends on the state and action sizes.
    pub lambda1: f64,
}

pub struct EnvRegistry {
    entries: Vec<EnvEntry>,
}

impl EnvRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(EnvEntry {
            name: "pendulum",
            make: || Box::new(Pendulum::new()),
            lambda1: 1.5,
        });
        r.register(EnvEntry {
            name: "mountaincar",
            make: || Box::new(MountainCar::new()),
            lambda1: 1.5,
        });
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, entry: EnvEntry) {
        self.entries.retain(|e| e.name != entry.name);
        self.entries.push(entry);
    }

    pub fn get(&self, name: &str) -> Result<&EnvEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownEnv(name.to_string()))
    }

    pub fn make(&self, name: &str) -> Result<Box<dyn Environment>> {
        Ok((self.get(name)?.make)())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }
}
