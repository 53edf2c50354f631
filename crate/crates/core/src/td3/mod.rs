//! TD3 for the residual actor and the end-to-end baseline.

mod buffer;
mod train;

pub use buffer::{Batch, ReplayBuffer, Transition};
pub use train::{train, TrainingLog, TrainingRecord, Trainer, TRAINING_LOG_HEADER};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::{Env, ObsMode, StepResult, Terminal};
use crate::error::{config_err, usage_err, Error, Result};
use crate::nn::{AdamState, Checkpoint, DropoutMode, Matrix, Mlp, NetRng, OutputActivation};
use crate::policy::compose_hybrid;
use crate::prior::Action;

pub const ACTION_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    pub policy_delay: usize,
    pub smoothing_noise_sigma: f64,
    pub smoothing_noise_clip: f64,
    pub exploration_noise_sigma: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub warmup_steps: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub total_episodes: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub hidden: Vec<usize>,
    pub dropout_p: f64,
    /// Sample dropout masks in the actor's training forwards.
    pub train_dropout: bool,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            policy_delay: 2,
            smoothing_noise_sigma: 0.2,
            smoothing_noise_clip: 0.5,
            exploration_noise_sigma: 0.1,
            batch_size: 256,
            buffer_capacity: 200_000,
            warmup_steps: 1000,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            total_episodes: 1000,
            eval_every: 10,
            eval_episodes: 10,
            hidden: vec![256, 256],
            dropout_p: 0.2,
            train_dropout: true,
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.gamma > 0.0 && self.gamma < 1.0, "gamma must lie in (0, 1)"),
            (self.tau >= 0.0 && self.tau <= 1.0, "tau must lie in [0, 1]"),
            (self.policy_delay >= 1, "policy_delay must be at least 1"),
            (self.smoothing_noise_sigma >= 0.0, "smoothing_noise_sigma must be non-negative"),
            (self.smoothing_noise_clip > 0.0, "smoothing_noise_clip must be positive"),
            (self.exploration_noise_sigma >= 0.0, "exploration_noise_sigma must be non-negative"),
            (self.batch_size >= 1, "batch_size must be positive"),
            (self.buffer_capacity >= self.batch_size, "buffer_capacity must hold at least one batch"),
            (self.actor_lr > 0.0 && self.critic_lr > 0.0, "learning rates must be positive"),
            (self.eval_every >= 1, "eval_every must be positive"),
            (!self.hidden.is_empty() && !self.hidden.contains(&0), "hidden layer sizes must be positive"),
            ((0.0..1.0).contains(&self.dropout_p), "dropout_p must lie in [0, 1)"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(config_err(*msg)),
            None => Ok(()),
        }
    }
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

/// Column-wise concatenation `[a | b]`.
pub fn hcat(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(usage_err("hcat of matrices with different row counts"));
    }
    let mut data = Vec::with_capacity(a.rows() * (a.cols() + b.cols()));
    for r in 0..a.rows() {
        data.extend_from_slice(a.row(r));
        data.extend_from_slice(b.row(r));
    }
    Matrix::from_vec(a.rows(), a.cols() + b.cols(), data)
}

fn check_finite(what: &str, value: f64, context: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Diverged(format!("{what} = {value}; {}", context())))
    }
}

fn norm(params: &[f64]) -> f64 {
    params.iter().map(|p| p * p).sum::<f64>().sqrt()
}

/// One policy-gradient ascent step on `mean Q(s, actor(s))`.
///
/// `critic` receives the actor's actions and returns the mean Q value
/// together with `dQ/da` per sample (not yet averaged).
pub fn actor_step(
    actor: &mut Mlp,
    opt: &mut AdamState,
    states: &Matrix,
    mode: DropoutMode<'_>,
    critic: impl FnOnce(&Matrix) -> Result<(f64, Matrix)>,
) -> Result<f64> {
    let tape = actor.forward_tape(states, mode)?;
    let (mean_q, dq_da) = critic(tape.output())?;
    let scale = -1.0 / states.rows() as f64;
    let upstream = Matrix::from_vec(dq_da.rows(), dq_da.cols(), dq_da.data().iter().map(|g| g * scale).collect())?;
    let (grads, _) = actor.backward(&tape, &upstream)?;
    opt.step(actor.params_mut(), &grads)?;
    Ok(-mean_q)
}

/// Critic losses of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticLoss {
    pub q1: f64,
    pub q2: f64,
}

/// Actor, twin critics, their targets and optimisers.
#[derive(Debug, Clone)]
pub struct Agent {
    pub mode: ObsMode,
    pub config: Td3Config,
    pub actor: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub actor_target: Mlp,
    pub critic1_target: Mlp,
    pub critic2_target: Mlp,
    actor_opt: AdamState,
    critic1_opt: AdamState,
    critic2_opt: AdamState,
    critic_updates: u64,
}

pub const NET_NAMES: [&str; 6] = ["actor", "critic1", "critic2", "actor_target", "critic1_target", "critic2_target"];

impl Agent {
    pub fn new(mode: ObsMode, config: Td3Config, rng: &mut NetRng) -> Result<Self> {
        config.validate()?;
        let obs = mode.dim();
        let actor = Mlp::new(&sizes(obs, &config.hidden, ACTION_DIM), OutputActivation::Tanh, config.dropout_p, rng)?;
        let critic_sizes = sizes(obs + ACTION_DIM, &config.hidden, 1);
        let critic1 = Mlp::new(&critic_sizes, OutputActivation::Identity, 0.0, rng)?;
        let critic2 = Mlp::new(&critic_sizes, OutputActivation::Identity, 0.0, rng)?;
        Ok(Self::from_nets(mode, config, [actor.clone(), critic1.clone(), critic2.clone(), actor, critic1, critic2]))
    }

    fn from_nets(mode: ObsMode, config: Td3Config, nets: [Mlp; 6]) -> Self {
        let [actor, critic1, critic2, actor_target, critic1_target, critic2_target] = nets;
        Self {
            actor_opt: AdamState::new(actor.num_params(), config.actor_lr),
            critic1_opt: AdamState::new(critic1.num_params(), config.critic_lr),
            critic2_opt: AdamState::new(critic2.num_params(), config.critic_lr),
            mode,
            config,
            actor,
            critic1,
            critic2,
            actor_target,
            critic1_target,
            critic2_target,
            critic_updates: 0,
        }
    }

    /// Restore all six networks; optimiser state starts fresh.
    pub fn from_checkpoint(checkpoint: &Checkpoint, config: Td3Config) -> Result<Self> {
        config.validate()?;
        let get = |name: &str| {
            checkpoint
                .net(name)
                .cloned()
                .ok_or_else(|| usage_err(format!("checkpoint has no {name} network; cannot resume training")))
        };
        let nets = [
            get(NET_NAMES[0])?,
            get(NET_NAMES[1])?,
            get(NET_NAMES[2])?,
            get(NET_NAMES[3])?,
            get(NET_NAMES[4])?,
            get(NET_NAMES[5])?,
        ];
        if nets[0].input_dim() != checkpoint.mode.dim() {
            return Err(usage_err("checkpoint actor does not match its observation mode"));
        }
        Ok(Self::from_nets(checkpoint.mode, config, nets))
    }

    pub fn to_checkpoint(&self, episodes: u64) -> Checkpoint {
        let nets = [
            &self.actor,
            &self.critic1,
            &self.critic2,
            &self.actor_target,
            &self.critic1_target,
            &self.critic2_target,
        ];
        Checkpoint::new(
            self.mode,
            episodes,
            NET_NAMES.iter().zip(nets).map(|(n, m)| (n.to_string(), m.clone())).collect(),
        )
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    fn dump(&self) -> String {
        format!(
            "critic updates {}, parameter norms: actor {:.3e}, critic1 {:.3e}, critic2 {:.3e}",
            self.critic_updates,
            norm(self.actor.params()),
            norm(self.critic1.params()),
            norm(self.critic2.params())
        )
    }

    /// Bellman targets `r + gamma (1 - done) min(Q1', Q2')` with smoothed
    /// target actions.
    pub fn critic_targets(&self, batch: &Batch, rng: &mut NetRng) -> Result<Vec<f64>> {
        let mut next_actions = self.actor_target.forward_batch(&batch.next_states, DropoutMode::Off)?;
        if self.config.smoothing_noise_sigma > 0.0 {
            let normal = Normal::new(0.0, self.config.smoothing_noise_sigma).expect("non-negative sigma");
            let c = self.config.smoothing_noise_clip;
            for a in next_actions.data_mut() {
                *a = (*a + normal.sample(rng).clamp(-c, c)).clamp(-1.0, 1.0);
            }
        }
        let input = hcat(&batch.next_states, &next_actions)?;
        let q1 = self.critic1_target.forward_batch(&input, DropoutMode::Off)?;
        let q2 = self.critic2_target.forward_batch(&input, DropoutMode::Off)?;
        Ok((0..batch.len())
            .map(|i| {
                let bootstrap = if batch.dones[i] { 0.0 } else { self.config.gamma * q1.data()[i].min(q2.data()[i]) };
                batch.rewards[i] + bootstrap
            })
            .collect())
    }

    /// Regress both critics onto the shared targets; one Adam step each.
    pub fn critic_update(&mut self, batch: &Batch, rng: &mut NetRng) -> Result<CriticLoss> {
        if batch.is_empty() {
            return Err(usage_err("critic update on an empty batch"));
        }
        let targets = self.critic_targets(batch, rng)?;
        let input = hcat(&batch.states, &batch.actions)?;
        let n = batch.len() as f64;
        let mut losses = [0.0; 2];
        for (k, (critic, opt)) in [(&mut self.critic1, &mut self.critic1_opt), (&mut self.critic2, &mut self.critic2_opt)]
            .into_iter()
            .enumerate()
        {
            let tape = critic.forward_tape(&input, DropoutMode::Off)?;
            let diff: Vec<f64> = tape.output().data().iter().zip(&targets).map(|(q, y)| q - y).collect();
            losses[k] = diff.iter().map(|d| d * d).sum::<f64>() / n;
            let upstream = Matrix::from_vec(batch.len(), 1, diff.iter().map(|d| 2.0 * d / n).collect())?;
            let (grads, _) = critic.backward(&tape, &upstream)?;
            opt.step(critic.params_mut(), &grads)?;
        }
        self.critic_updates += 1;
        let dump = || self.dump();
        check_finite("critic1 loss", losses[0], dump)?;
        check_finite("critic2 loss", losses[1], || self.dump())?;
        Ok(CriticLoss {
            q1: losses[0],
            q2: losses[1],
        })
    }

    /// Deterministic policy gradient through critic 1, then Polyak updates
    /// of all three targets.
    pub fn actor_update(&mut self, batch: &Batch, rng: &mut NetRng) -> Result<f64> {
        if batch.is_empty() {
            return Err(usage_err("actor update on an empty batch"));
        }
        let obs_dim = self.mode.dim();
        let critic = &self.critic1;
        let states = &batch.states;
        let mode = if self.config.train_dropout {
            DropoutMode::Stochastic(rng)
        } else {
            DropoutMode::Off
        };
        let loss = actor_step(&mut self.actor, &mut self.actor_opt, states, mode, |actions| {
            let tape = critic.forward_tape(&hcat(states, actions)?, DropoutMode::Off)?;
            let q = tape.output().data();
            let mean_q = q.iter().sum::<f64>() / q.len() as f64;
            let ones = Matrix::from_vec(q.len(), 1, vec![1.0; q.len()])?;
            let (_, input_grad) = critic.backward(&tape, &ones)?;
            let mut dq_da = Vec::with_capacity(q.len() * ACTION_DIM);
            for r in 0..q.len() {
                dq_da.extend_from_slice(&input_grad.row(r)[obs_dim..]);
            }
            Ok((mean_q, Matrix::from_vec(q.len(), ACTION_DIM, dq_da)?))
        })?;
        check_finite("actor loss", loss, || self.dump())?;
        self.update_targets()?;
        Ok(loss)
    }

    pub fn update_targets(&mut self) -> Result<()> {
        let tau = self.config.tau;
        self.actor_target.soft_update_from(&self.actor, tau)?;
        self.critic1_target.soft_update_from(&self.critic1, tau)?;
        self.critic2_target.soft_update_from(&self.critic2, tau)
    }

    /// One critic update, plus an actor update every `policy_delay` calls.
    pub fn train_step(&mut self, buffer: &ReplayBuffer, rng: &mut NetRng) -> Result<CriticLoss> {
        let batch = buffer.sample(self.config.batch_size, rng)?;
        let loss = self.critic_update(&batch, rng)?;
        if self.critic_updates % self.config.policy_delay as u64 == 0 {
            self.actor_update(&batch, rng)?;
        }
        Ok(loss)
    }
}

/// How the network-side action of a rollout step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    /// Uniform on `[-1, 1]^2`, used during warmup.
    Uniform,
    /// Deterministic actor output plus Gaussian noise of this sigma.
    Gaussian(f64),
}

/// Executed action for a network-side action in the given mode.
pub fn executed_action(mode: ObsMode, prior: Action, policy_action: [f64; 2]) -> Action {
    match mode {
        ObsMode::Residual => compose_hybrid(prior, policy_action),
        ObsMode::EndToEnd => Action::new(policy_action[0], policy_action[1]).clipped(),
    }
}

/// Act once in `env` and return the transition to store.
pub fn rollout_step(env: &mut Env, actor: &Mlp, exploration: Exploration, rng: &mut NetRng) -> Result<(Transition, StepResult)> {
    let obs = env.observation().ok_or_else(|| usage_err("rollout_step before reset"))?.clone();
    let state = obs.to_vec();
    let policy_action = match exploration {
        Exploration::Uniform => [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)],
        Exploration::Gaussian(sigma) => {
            let out = actor.forward(&state, DropoutMode::Off)?;
            let mut a = [out[0], out[1]];
            if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).map_err(|e| config_err(e.to_string()))?;
                a.iter_mut().for_each(|x| *x += normal.sample(rng));
            }
            a.map(|x| x.clamp(-1.0, 1.0))
        }
    };
    let result = env.step(executed_action(env.mode(), obs.prior_action, policy_action))?;
    let transition = Transition {
        state,
        action: policy_action,
        reward: result.reward,
        next_state: result.observation.to_vec(),
        done: result.terminal.is_some_and(Terminal::is_true_terminal),
    };
    Ok((transition, result))
}
