//! Plain dense TD3 written with nested loops over fully connected matrices.
//! No masks, no shared kernels: only the environment, the RNG and the
//! floating-point operation order are common with the library.

#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use sparse_td3::envs::Environment;
use sparse_td3::harness::stream_rng;

#[derive(Clone, Copy)]
pub enum Act {
    Relu,
    Tanh(f64),
    Linear,
}

impl Act {
    fn f(self, z: f64) -> f64 {
        match self {
            Act::Relu => z.max(0.0),
            Act::Tanh(s) => s * z.tanh(),
            Act::Linear => z,
        }
    }

    fn df(self, z: f64) -> f64 {
        match self {
            Act::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Act::Tanh(s) => {
                let t = z.tanh();
                s * (1.0 - t * t)
            }
            Act::Linear => 1.0,
        }
    }
}

/// Eight running partial sums combined pairwise.
fn lanes_sum(n: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut acc = [0.0f64; 8];
    for i in 0..n {
        acc[i % 8] += term(i);
    }
    ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))
}

/// Fully connected layer; `w[j][k]` connects input `j` to output `k`.
#[derive(Clone)]
pub struct Dense {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    act: Act,
    mw: Vec<Vec<f64>>,
    vw: Vec<Vec<f64>>,
    mb: Vec<f64>,
    vb: Vec<f64>,
}

/// Activations are stored per sample: `x[b][feature]`.
type Rows = Vec<Vec<f64>>;

struct Grad {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Clone)]
pub struct Net {
    pub layers: Vec<Dense>,
    adam_t: i32,
}

impl Net {
    fn init(sizes: &[usize], out: Act, rng: &mut ChaCha8Rng) -> Self {
        let mut layers = Vec::new();
        for (l, pair) in sizes.windows(2).enumerate() {
            let (n_in, n_out) = (pair[0], pair[1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).unwrap();
            let mut w = vec![vec![0.0; n_out]; n_in];
            for row in w.iter_mut() {
                for v in row.iter_mut() {
                    *v = dist.sample(rng);
                }
            }
            let b: Vec<f64> = (0..n_out).map(|_| dist.sample(rng)).collect();
            let act = if l + 2 == sizes.len() { out } else { Act::Relu };
            layers.push(Dense {
                w,
                b,
                act,
                mw: vec![vec![0.0; n_out]; n_in],
                vw: vec![vec![0.0; n_out]; n_in],
                mb: vec![0.0; n_out],
                vb: vec![0.0; n_out],
            });
        }
        Net { layers, adam_t: 0 }
    }

    /// Returns every layer input, every pre-activation and the output.
    fn forward(&self, x: &Rows) -> (Vec<Rows>, Vec<Rows>, Rows) {
        let mut inputs = Vec::new();
        let mut pres = Vec::new();
        let mut cur = x.clone();
        for layer in &self.layers {
            let n_out = layer.b.len();
            let mut pre = vec![vec![0.0; n_out]; cur.len()];
            let mut out = vec![vec![0.0; n_out]; cur.len()];
            for (b, xb) in cur.iter().enumerate() {
                // every output accumulates its inputs in increasing order
                pre[b].copy_from_slice(&layer.b);
                for (j, xj) in xb.iter().enumerate() {
                    for k in 0..n_out {
                        pre[b][k] += layer.w[j][k] * xj;
                    }
                }
                for k in 0..n_out {
                    out[b][k] = layer.act.f(pre[b][k]);
                }
            }
            inputs.push(cur);
            pres.push(pre);
            cur = out;
        }
        (inputs, pres, cur)
    }

    fn predict(&self, x: &Rows) -> Rows {
        self.forward(x).2
    }

    /// Backprop of `grad` (per sample, per output). Returns the parameter
    /// gradients and, when `want_input`, the gradient with respect to the
    /// network input.
    fn backward(&self, inputs: &[Rows], pres: &[Rows], grad: &Rows, want_input: bool) -> (Vec<Grad>, Rows) {
        let n = grad.len();
        let mut g = grad.clone();
        let mut grads = Vec::new();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let (n_in, n_out) = (layer.w.len(), layer.b.len());
            let delta: Rows = (0..n)
                .map(|b| (0..n_out).map(|k| g[b][k] * layer.act.df(pres[l][b][k])).collect())
                .collect();
            let x = &inputs[l];
            let xt: Rows = (0..n_in).map(|j| (0..n).map(|b| x[b][j]).collect()).collect();
            let dt: Rows = (0..n_out).map(|k| (0..n).map(|b| delta[b][k]).collect()).collect();
            let w = xt
                .iter()
                .map(|xj| dt.iter().map(|dk| lanes_sum(n, |b| xj[b] * dk[b])).collect())
                .collect();
            let bias = dt.iter().map(|dk| lanes_sum(n, |b| dk[b])).collect();
            grads.push(Grad { w, b: bias });
            if l == 0 && !want_input {
                break;
            }
            let mut gi = vec![vec![0.0; n_in]; n];
            for (b, gib) in gi.iter_mut().enumerate() {
                for (j, v) in gib.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for k in 0..n_out {
                        acc += layer.w[j][k] * delta[b][k];
                    }
                    *v = acc;
                }
            }
            g = gi;
        }
        grads.reverse();
        (grads, g)
    }

    fn adam(&mut self, grads: &[Grad], lr: f64, decay: f64) {
        fn upd(p: &mut f64, g: f64, m: &mut f64, v: &mut f64, lr: f64, c1: f64, c2: f64) {
            *m = 0.9 * *m + (1.0 - 0.9) * g;
            *v = 0.999 * *v + (1.0 - 0.999) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + 1e-8);
        }
        self.adam_t += 1;
        let c1 = 1.0 - 0.9f64.powi(self.adam_t);
        let c2 = 1.0 - 0.999f64.powi(self.adam_t);
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            for j in 0..layer.w.len() {
                for k in 0..layer.b.len() {
                    let gi = g.w[j][k] + decay * layer.w[j][k];
                    upd(&mut layer.w[j][k], gi, &mut layer.mw[j][k], &mut layer.vw[j][k], lr, c1, c2);
                }
            }
            for k in 0..layer.b.len() {
                upd(&mut layer.b[k], g.b[k], &mut layer.mb[k], &mut layer.vb[k], lr, c1, c2);
            }
        }
    }

    fn soft_from(&mut self, cur: &Net, tau: f64) {
        for (t, c) in self.layers.iter_mut().zip(&cur.layers) {
            for j in 0..t.w.len() {
                for k in 0..t.b.len() {
                    t.w[j][k] = tau * c.w[j][k] + (1.0 - tau) * t.w[j][k];
                }
            }
            for k in 0..t.b.len() {
                t.b[k] = tau * c.b[k] + (1.0 - tau) * t.b[k];
            }
        }
    }
}

pub struct Settings {
    pub seed: u64,
    pub steps: u64,
    pub warmup: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
    pub hidden: Vec<usize>,
}

pub struct Outcome {
    pub actor: Net,
    pub critic1: Net,
    pub critic2: Net,
    pub targets: [Net; 3],
    /// `(step, mean, std)` per evaluation.
    pub curve: Vec<(u64, f64, f64)>,
}

struct Stored {
    s: Vec<f64>,
    a: Vec<f64>,
    r: f64,
    s2: Vec<f64>,
    done: bool,
}

fn concat(a: &Rows, b: &Rows) -> Rows {
    a.iter().zip(b).map(|(x, y)| x.iter().chain(y).copied().collect()).collect()
}

fn critic_step(critic: &mut Net, input: &Rows, y: &[f64]) {
    let n = y.len();
    let (xs, zs, q) = critic.forward(input);
    let grad: Rows = (0..n).map(|b| vec![2.0 * (q[b][0] - y[b]) / n as f64]).collect();
    let (g, _) = critic.backward(&xs, &zs, &grad, false);
    critic.adam(&g, 1e-3, 2e-4);
}

/// Dense TD3 with the default hyperparameters on `env`.
pub fn run(env: &mut dyn Environment, eval_env: &mut dyn Environment, s: &Settings) -> Outcome {
    let spec = env.spec();
    let max = spec.max_action;
    let (gamma, tau, delay, batch) = (0.99, 0.005, 2u64, 100usize);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let actor_sizes: Vec<usize> = [spec.state_dim].into_iter().chain(s.hidden.clone()).chain([spec.action_dim]).collect();
    let critic_sizes: Vec<usize> =
        [spec.state_dim + spec.action_dim].into_iter().chain(s.hidden.clone()).chain([1]).collect();
    let mut actor = Net::init(&actor_sizes, Act::Tanh(max), &mut rng);
    let mut critic1 = Net::init(&critic_sizes, Act::Linear, &mut rng);
    let mut critic2 = Net::init(&critic_sizes, Act::Linear, &mut rng);
    let (mut actor_t, mut critic1_t, mut critic2_t) = (actor.clone(), critic1.clone(), critic2.clone());

    let mut buffer: Vec<Stored> = Vec::new();
    let mut env_rng = stream_rng(s.seed, 1);
    let mut state = env.reset(&mut env_rng);
    let mut curve = Vec::new();
    let mut updates = 0u64;

    for step in 1..=s.steps {
        let action: Vec<f64> = if step <= s.warmup {
            (0..spec.action_dim).map(|_| rng.random_range(-max..=max)).collect()
        } else {
            let std = 0.1 * max;
            actor.predict(&vec![state.clone()])[0]
                .iter()
                .map(|a| {
                    let n: f64 = rng.sample(StandardNormal);
                    (a + std * n).clamp(-max, max)
                })
                .collect()
        };
        let r = env.step(&action).unwrap();
        buffer.push(Stored {
            s: state.clone(),
            a: action,
            r: r.reward,
            s2: r.state.clone(),
            done: r.terminal,
        });

        if step > s.warmup {
            updates += 1;
            let idx: Vec<usize> = (0..batch).map(|_| rng.random_range(0..buffer.len())).collect();
            let states: Rows = idx.iter().map(|&i| buffer[i].s.clone()).collect();
            let actions: Rows = idx.iter().map(|&i| buffer[i].a.clone()).collect();
            let next: Rows = idx.iter().map(|&i| buffer[i].s2.clone()).collect();

            let mut next_a = actor_t.predict(&next);
            for row in next_a.iter_mut() {
                for a in row.iter_mut() {
                    let n: f64 = rng.sample(StandardNormal);
                    let eps = (0.2 * n).clamp(-0.5, 0.5);
                    *a = (*a + eps).clamp(-max, max);
                }
            }
            let target_in = concat(&next, &next_a);
            let q1 = critic1_t.predict(&target_in);
            let q2 = critic2_t.predict(&target_in);
            let y: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(b, &i)| {
                    let not_done = if buffer[i].done { 0.0 } else { 1.0 };
                    buffer[i].r + gamma * not_done * q1[b][0].min(q2[b][0])
                })
                .collect();

            let input = concat(&states, &actions);
            critic_step(&mut critic1, &input, &y);
            critic_step(&mut critic2, &input, &y);

            if updates.is_multiple_of(delay) {
                let (axs, azs, acts) = actor.forward(&states);
                let (cxs, czs, _) = critic1.forward(&concat(&states, &acts));
                let gq: Rows = vec![vec![-1.0 / batch as f64]; batch];
                let (_, d_in) = critic1.backward(&cxs, &czs, &gq, true);
                let d_actions: Rows = d_in.iter().map(|row| row[spec.state_dim..].to_vec()).collect();
                let (g, _) = actor.backward(&axs, &azs, &d_actions, false);
                actor.adam(&g, 1e-3, 2e-4);
                critic1_t.soft_from(&critic1, tau);
                critic2_t.soft_from(&critic2, tau);
                actor_t.soft_from(&actor, tau);
            }
        }
        state = if r.done() { env.reset(&mut env_rng) } else { r.state };

        if step % s.eval_every == 0 {
            let mut erng = stream_rng(s.seed, 2);
            let mut returns = Vec::new();
            for _ in 0..s.eval_episodes {
                let mut st = eval_env.reset(&mut erng);
                let mut ret = 0.0;
                loop {
                    let a = actor.predict(&vec![st.clone()])[0].clone();
                    let out = eval_env.step(&a).unwrap();
                    ret += out.reward;
                    if out.done() {
                        break;
                    }
                    st = out.state;
                }
                returns.push(ret);
            }
            let n = returns.len() as f64;
            let mean = returns.iter().sum::<f64>() / n;
            let var = returns.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            curve.push((step, mean, var.sqrt()));
        }
    }
    Outcome {
        actor,
        critic1,
        critic2,
        targets: [actor_t, critic1_t, critic2_t],
        curve,
    }
}
