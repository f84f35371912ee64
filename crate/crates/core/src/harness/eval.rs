use rand::{Rng, RngCore};
use serde::Serialize;

use crate::agent::{select_action, Phase};
use crate::envs::Environment;
use crate::error::Result;
use crate::sparse::Mlp;

/// One point of a learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalRecord {
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn rollout<F>(env: &mut dyn Environment, rng: &mut dyn RngCore, mut policy: F) -> Result<f64>
where
    F: FnMut(&[f64], &mut dyn RngCore) -> Result<Vec<f64>>,
{
    let mut state = env.reset(rng);
    let mut ret = 0.0;
    loop {
        let action = policy(&state, rng)?;
        let r = env.step(&action)?;
        ret += r.reward;
        if r.done() {
            return Ok(ret);
        }
        state = r.state;
    }
}

/// Undiscounted returns of the noise-free policy over `episodes` episodes.
/// `step` is left at 0 for the caller to fill in.
pub fn evaluate_policy(actor: &Mlp, env: &mut dyn Environment, episodes: usize, rng: &mut dyn RngCore) -> Result<EvalRecord> {
    let max = env.spec().max_action;
    let returns = (0..episodes)
        .map(|_| rollout(env, rng, |s, r| select_action(actor, s, 0.0, max, Phase::Greedy, r)))
        .collect::<Result<Vec<_>>>()?;
    let (mean_return, std_return) = mean_std(&returns);
    Ok(EvalRecord {
        step: 0,
        mean_return,
        std_return,
    })
}

/// Reference: uniformly random actions.
pub fn random_policy_return(env: &mut dyn Environment, episodes: usize, rng: &mut dyn RngCore) -> Result<EvalRecord> {
    let spec = env.spec();
    let returns = (0..episodes)
        .map(|_| {
            rollout(env, rng, |_, r| {
                Ok((0..spec.action_dim).map(|_| r.random_range(-spec.max_action..=spec.max_action)).collect())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean_return, std_return) = mean_std(&returns);
    Ok(EvalRecord {
        step: 0,
        mean_return,
        std_return,
    })
}
