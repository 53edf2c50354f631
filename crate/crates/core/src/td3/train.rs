use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;

use super::{rollout_step, Agent, Exploration, ReplayBuffer, Td3Config};
use crate::env::{discounted_return, Env, ObsMode, Terminal};
use crate::error::{usage_err, Error, Result};
use crate::eval::{run_suite, EvalSettings, MetricsRow, Scenario, Suite};
use crate::nn::{Checkpoint, NetRng};
use crate::policy::{Controller, PolicyMode, SwitchConfig};
use crate::rollout::derive_seed;
use crate::world::WorldSpec;

pub const TRAINING_LOG_HEADER: &str = "episode,steps,path_length_m,success,return,eval_success,eval_spl";

// Seed streams. Episode start/goal draws use stream 0, which the
// evaluation suites never touch.
const EPISODE_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const EVAL_SUITE_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    /// 1-based episode number.
    pub episode: u64,
    pub steps: usize,
    pub path_length: f64,
    pub success: bool,
    /// Discounted return of the episode.
    pub ret: f64,
    /// `(success rate, SPL)` of the periodic evaluation run after this
    /// episode, if one was due.
    pub eval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub records: Vec<TrainingRecord>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAINING_LOG_HEADER);
        out.push('\n');
        for r in &self.records {
            let (es, ep) = match r.eval {
                Some((s, p)) => (format!("{s}"), format!("{p}")),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.episode,
                r.steps,
                r.path_length,
                u8::from(r.success),
                r.ret,
                es,
                ep
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.join(",") != TRAINING_LOG_HEADER {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {TRAINING_LOG_HEADER:?}"),
            });
        }
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line());
            let err = |field: &str| Error::Parse {
                line,
                msg: format!("bad {field} value"),
            };
            let num = |i: usize, name: &str| row[i].parse::<f64>().map_err(|_| err(name));
            let eval = match (&row[5], &row[6]) {
                ("", "") => None,
                _ => Some((num(5, "eval_success")?, num(6, "eval_spl")?)),
            };
            records.push(TrainingRecord {
                episode: row[0].parse().map_err(|_| err("episode"))?,
                steps: row[1].parse().map_err(|_| err("steps"))?,
                path_length: num(2, "path_length_m")?,
                success: match &row[3] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(err("success")),
                },
                ret: num(4, "return")?,
                eval,
            });
        }
        Ok(Self { records })
    }

    /// `(episode, success rate)` of every evaluation point.
    pub fn eval_curve(&self) -> Vec<(u64, f64)> {
        self.records.iter().filter_map(|r| r.eval.map(|(s, _)| (r.episode, s))).collect()
    }

    /// First episode whose evaluation success reached `threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<u64> {
        self.eval_curve().into_iter().find(|&(_, s)| s >= threshold).map(|(e, _)| e)
    }

    pub fn final_eval(&self) -> Option<(f64, f64)> {
        self.records.iter().rev().find_map(|r| r.eval)
    }
}

/// The TD3 training loop over a fixed set of training worlds.
pub struct Trainer {
    agent: Agent,
    buffer: ReplayBuffer,
    env: Env,
    worlds: Vec<Arc<WorldSpec>>,
    settings: EvalSettings,
    eval_suite: Suite,
    seed: u64,
    episode: u64,
    total_steps: u64,
    warmup_steps: u64,
    log: TrainingLog,
}

impl Trainer {
    pub fn new(
        worlds: Vec<Arc<WorldSpec>>,
        config: Td3Config,
        settings: EvalSettings,
        mode: ObsMode,
        seed: u64,
    ) -> Result<Self> {
        let agent = Agent::new(mode, config, &mut NetRng::seed_from_u64(derive_seed(seed, INIT_STREAM, 0)))?;
        Self::with_agent(worlds, agent, settings, seed, 0, TrainingLog::default())
    }

    /// Continue from a checkpoint written by [`Trainer::checkpoint`]. The
    /// replay buffer and optimiser moments start empty and the uniform
    /// warmup is not repeated; updates resume once a batch is buffered.
    pub fn resume(
        worlds: Vec<Arc<WorldSpec>>,
        config: Td3Config,
        settings: EvalSettings,
        checkpoint: &Checkpoint,
        mut log: TrainingLog,
        seed: u64,
    ) -> Result<Self> {
        let agent = Agent::from_checkpoint(checkpoint, config)?;
        log.records.retain(|r| r.episode <= checkpoint.episodes);
        if log.records.len() as u64 != checkpoint.episodes {
            return Err(usage_err(format!(
                "training log has {} rows but the checkpoint is at episode {}",
                log.records.len(),
                checkpoint.episodes
            )));
        }
        Self::with_agent(worlds, agent, settings, seed, checkpoint.episodes, log)
    }

    fn with_agent(
        worlds: Vec<Arc<WorldSpec>>,
        agent: Agent,
        settings: EvalSettings,
        seed: u64,
        episode: u64,
        log: TrainingLog,
    ) -> Result<Self> {
        if worlds.is_empty() {
            return Err(usage_err("training needs at least one world"));
        }
        let eval_suite = Suite::sample(
            Scenario::EnvGen,
            &worlds,
            agent.config.eval_episodes,
            derive_seed(seed, EVAL_SUITE_STREAM, 0),
        )?
        .with_shortest_paths(settings.grid_cols, settings.grid_rows)?;
        let env = Env::new(settings.episode, settings.laser, settings.prior, agent.mode)?;
        let warmup_steps = if episode == 0 { agent.config.warmup_steps as u64 } else { 0 };
        Ok(Self {
            buffer: ReplayBuffer::new(agent.config.buffer_capacity),
            env,
            worlds,
            settings,
            eval_suite,
            seed,
            episode,
            total_steps: 0,
            warmup_steps,
            log,
            agent,
        })
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    /// Episodes completed so far.
    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn checkpoint(&self) -> Checkpoint {
        self.agent.to_checkpoint(self.episode)
    }

    /// The deterministic deployment-style policy used for periodic
    /// evaluation: dropout off, single forward pass.
    pub fn eval_controller(&self) -> Result<Controller> {
        let mode = match self.agent.mode {
            ObsMode::Residual => PolicyMode::Rrn,
            ObsMode::EndToEnd => PolicyMode::EndToEnd,
        };
        let switch = SwitchConfig {
            rrn_single_pass: true,
            ..self.settings.switch
        };
        Controller::new(mode, Some(self.agent.actor.clone()), switch)
    }

    /// `(success rate, SPL)` on the fixed training-world evaluation suite.
    pub fn evaluate_policy(&self) -> Result<(f64, f64)> {
        if self.eval_suite.is_empty() {
            return Ok((0.0, 0.0));
        }
        let controller = self.eval_controller()?;
        let outcomes = run_suite(&controller, &self.eval_suite, &self.settings)?;
        let metrics: Vec<_> = outcomes.iter().map(|o| o.metrics).collect();
        let row = MetricsRow::from_episodes(Scenario::EnvGen, controller.mode(), 1, &metrics);
        Ok((row.success.0, row.spl.0))
    }

    pub fn run_episode(&mut self) -> Result<TrainingRecord> {
        let k = self.episode;
        let world = Arc::clone(&self.worlds[(k % self.worlds.len() as u64) as usize]);
        let mut rng = NetRng::seed_from_u64(derive_seed(self.seed, NOISE_STREAM, k));
        self.env.reset(&world, derive_seed(self.seed, EPISODE_STREAM, k))?;
        let mut rewards = Vec::new();
        let terminal = loop {
            let exploration = if self.total_steps < self.warmup_steps {
                Exploration::Uniform
            } else {
                Exploration::Gaussian(self.agent.config.exploration_noise_sigma)
            };
            let (transition, result) = rollout_step(&mut self.env, &self.agent.actor, exploration, &mut rng)?;
            rewards.push(result.reward);
            self.buffer.push(transition);
            self.total_steps += 1;
            if self.total_steps > self.warmup_steps && self.buffer.len() >= self.agent.config.batch_size {
                self.agent.train_step(&self.buffer, &mut rng).map_err(|e| match e {
                    Error::Diverged(msg) => Error::Diverged(format!("episode {}, step {}: {msg}", k + 1, rewards.len())),
                    other => other,
                })?;
            }
            if let Some(t) = result.terminal {
                break t;
            }
        };
        self.episode += 1;
        let eval = if self.episode % self.agent.config.eval_every as u64 == 0 {
            Some(self.evaluate_policy()?)
        } else {
            None
        };
        let record = TrainingRecord {
            episode: self.episode,
            steps: rewards.len(),
            path_length: self.env.path_length(),
            success: terminal == Terminal::Goal,
            ret: discounted_return(&rewards, self.agent.config.gamma),
            eval,
        };
        self.log.records.push(record.clone());
        Ok(record)
    }

    /// Train until `total_episodes`, calling `on_eval` after every
    /// evaluation point (e.g. to write a periodic checkpoint).
    pub fn run(&mut self, mut on_eval: impl FnMut(&Trainer) -> Result<()>) -> Result<()> {
        while self.episode < self.agent.config.total_episodes as u64 {
            let record = self.run_episode()?;
            if record.eval.is_some() {
                on_eval(self)?;
            }
        }
        Ok(())
    }
}

/// Train from scratch and return the final checkpoint and the log.
pub fn train(
    worlds: Vec<Arc<WorldSpec>>,
    config: Td3Config,
    settings: EvalSettings,
    mode: ObsMode,
    seed: u64,
) -> Result<(Checkpoint, TrainingLog)> {
    let mut trainer = Trainer::new(worlds, config, settings, mode, seed)?;
    trainer.run(|_| Ok(()))?;
    Ok((trainer.checkpoint(), trainer.log))
}
