//! Episodic point-goal navigation task with a sparse success reward.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, usage_err, Error, Result};
use crate::prior::{prior_command, Action, PriorParams};
use crate::world::{collides, normalize_angle, scan, step_kinematics, LaserConfig, LaserScan, Point, Pose, WorldSpec};

pub const LASER_BINS: usize = 15;
pub const RESIDUAL_OBS_DIM: usize = 21;
pub const END_TO_END_OBS_DIM: usize = 19;

/// Rejection-sampling budget for start and goal draws.
pub const MAX_SAMPLING_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    /// Success radius (meters).
    pub d_threshold: f64,
    pub max_steps: usize,
    pub gamma: f64,
    /// Control period (seconds).
    pub dt: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            d_threshold: 0.2,
            max_steps: 300,
            gamma: 0.99,
            dt: 0.1,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_threshold > 0.0) {
            return Err(config_err("d_threshold must be positive"));
        }
        if self.max_steps == 0 {
            return Err(config_err("max_steps must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(config_err(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config_err("dt must be positive"));
        }
        Ok(())
    }
}

/// Which observation layout the policy network consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObsMode {
    /// 21 inputs: scan bins, goal polar coordinates, previous and prior action.
    Residual,
    /// 19 inputs: as above without the prior action.
    EndToEnd,
}

impl ObsMode {
    pub fn dim(self) -> usize {
        match self {
            ObsMode::Residual => RESIDUAL_OBS_DIM,
            ObsMode::EndToEnd => END_TO_END_OBS_DIM,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObsMode::Residual => "residual",
            ObsMode::EndToEnd => "end_to_end",
        }
    }
}

impl std::str::FromStr for ObsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "residual" => Ok(ObsMode::Residual),
            "end_to_end" => Ok(ObsMode::EndToEnd),
            other => Err(usage_err(format!("unknown mode {other:?} (expected residual | end_to_end)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Per-bin minimum range divided by `max_range`; bin 0 is rightmost.
    pub laser_bins: [f64; LASER_BINS],
    pub angle_to_goal: f64,
    pub dist_to_goal: f64,
    pub prev_action: Action,
    /// The prior's command for this state. Always computed, only fed to
    /// the network in residual mode.
    pub prior_action: Action,
    pub mode: ObsMode,
}

impl Observation {
    /// Flattened network input in the fixed layout
    /// `[bins.., angle, dist, prev_v, prev_omega, (prior_v, prior_omega)]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.mode.dim());
        self.write_into(&mut v);
        v
    }

    pub fn write_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.laser_bins);
        out.extend_from_slice(&[
            self.angle_to_goal,
            self.dist_to_goal,
            self.prev_action.v,
            self.prev_action.omega,
        ]);
        if self.mode == ObsMode::Residual {
            out.extend_from_slice(&[self.prior_action.v, self.prior_action.omega]);
        }
    }
}

pub fn build_observation(
    scan: &LaserScan,
    pose: &Pose,
    goal: Point,
    prev_action: Action,
    prior_action: Action,
    mode: ObsMode,
) -> Result<Observation> {
    let n = scan.ranges.len();
    if n < LASER_BINS || n % LASER_BINS != 0 {
        return Err(config_err(format!("{n} rays cannot be split into {LASER_BINS} equal bins")));
    }
    let per_bin = n / LASER_BINS;
    let mut laser_bins = [0.0; LASER_BINS];
    for (bin, chunk) in laser_bins.iter_mut().zip(scan.ranges.chunks_exact(per_bin)) {
        *bin = chunk.iter().cloned().fold(f64::INFINITY, f64::min) / scan.max_range;
    }
    let (angle_to_goal, dist_to_goal) = goal_polar(pose, goal);
    Ok(Observation {
        laser_bins,
        angle_to_goal,
        dist_to_goal,
        prev_action,
        prior_action,
        mode,
    })
}

/// Goal bearing in the robot frame and Euclidean distance.
pub fn goal_polar(pose: &Pose, goal: Point) -> (f64, f64) {
    let dx = goal.x - pose.x;
    let dy = goal.y - pose.y;
    (normalize_angle(dy.atan2(dx) - pose.theta), dx.hypot(dy))
}

pub fn compute_reward(d_target: f64, config: &EpisodeConfig) -> f64 {
    if d_target < config.d_threshold {
        1.0
    } else {
        0.0
    }
}

/// `sum_k gamma^k r_k` with the first reward undiscounted.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards
        .iter()
        .rev()
        .fold(0.0, |acc, &r| r + gamma * acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Goal,
    Collision,
    Timeout,
}

impl Terminal {
    /// Whether the transition into this state should cut bootstrapping.
    /// Timeouts are an artificial horizon and keep bootstrapping.
    pub fn is_true_terminal(self) -> bool {
        matches!(self, Terminal::Goal | Terminal::Collision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub pose: Pose,
    pub d_target: f64,
    pub executed: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: Option<Terminal>,
    pub info: StepInfo,
}

/// Draws a collision-free start pose and goal point for `world`.
pub fn sample_episode(world: &WorldSpec, seed: u64) -> Result<(Pose, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |region: &crate::world::Shape, what: &str, rng: &mut ChaCha8Rng| {
        for _ in 0..MAX_SAMPLING_ATTEMPTS {
            let p = region.sample(rng);
            if world.contains_point(p) && !collides(&Pose::new(p.x, p.y, 0.0), world) {
                return Ok(p);
            }
        }
        Err(config_err(format!(
            "could not sample a collision-free {what} after {MAX_SAMPLING_ATTEMPTS} attempts"
        )))
    };
    let start = draw(world.start_region(), "start", &mut rng)?;
    let goal = draw(world.goal_region(), "goal", &mut rng)?;
    let heading = PI - 2.0 * PI * rng.random::<f64>();
    Ok((Pose::new(start.x, start.y, heading), goal))
}

/// A single-threaded episode runner.
#[derive(Debug, Clone)]
pub struct Env {
    config: EpisodeConfig,
    laser: LaserConfig,
    prior: PriorParams,
    mode: ObsMode,
    state: Option<EpisodeState>,
}

#[derive(Debug, Clone)]
struct EpisodeState {
    world: Arc<WorldSpec>,
    pose: Pose,
    goal: Point,
    steps: usize,
    prev_action: Action,
    path_length: f64,
    observation: Observation,
    done: bool,
}

impl Env {
    pub fn new(config: EpisodeConfig, laser: LaserConfig, prior: PriorParams, mode: ObsMode) -> Result<Self> {
        config.validate()?;
        laser.validate()?;
        prior.validate(laser.max_range)?;
        Ok(Self {
            config,
            laser,
            prior,
            mode,
            state: None,
        })
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn laser(&self) -> &LaserConfig {
        &self.laser
    }

    pub fn prior_params(&self) -> &PriorParams {
        &self.prior
    }

    pub fn mode(&self) -> ObsMode {
        self.mode
    }

    pub fn reset(&mut self, world: &Arc<WorldSpec>, seed: u64) -> Result<Observation> {
        let (start, goal) = sample_episode(world, seed)?;
        self.reset_to(world, start, goal)
    }

    /// Start an episode from an explicit start pose and goal.
    pub fn reset_to(&mut self, world: &Arc<WorldSpec>, start: Pose, goal: Point) -> Result<Observation> {
        if collides(&start, world) {
            return Err(config_err("start pose collides with the world"));
        }
        let observation = self.observe(world, &start, goal, Action::ZERO)?;
        self.state = Some(EpisodeState {
            world: Arc::clone(world),
            pose: start,
            goal,
            steps: 0,
            prev_action: Action::ZERO,
            path_length: 0.0,
            observation: observation.clone(),
            done: false,
        });
        Ok(observation)
    }

    fn observe(&self, world: &WorldSpec, pose: &Pose, goal: Point, prev: Action) -> Result<Observation> {
        let scan = scan(pose, &self.laser, world)?;
        let (angle, dist) = goal_polar(pose, goal);
        let prior = prior_command(&scan, angle, dist, &self.prior);
        build_observation(&scan, pose, goal, prev, prior, self.mode)
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| usage_err("step called before reset"))?;
        if state.done {
            return Err(usage_err("step called after the episode terminated"));
        }
        let executed = action.clipped();
        let pose = step_kinematics(&state.pose, executed.v, executed.omega, self.config.dt);
        let observation = self.observe(&state.world, &pose, state.goal, executed)?;

        let state = self.state.as_mut().expect("checked above");
        state.path_length += (pose.x - state.pose.x).hypot(pose.y - state.pose.y);
        state.pose = pose;
        state.steps += 1;
        state.prev_action = executed;

        let d_target = pose.position().distance(&state.goal);
        let reward = compute_reward(d_target, &self.config);
        let terminal = if reward > 0.0 {
            Some(Terminal::Goal)
        } else if collides(&pose, &state.world) {
            Some(Terminal::Collision)
        } else if state.steps >= self.config.max_steps {
            Some(Terminal::Timeout)
        } else {
            None
        };
        state.done = terminal.is_some();
        state.observation = observation.clone();
        Ok(StepResult {
            observation,
            reward,
            terminal,
            info: StepInfo {
                pose,
                d_target,
                executed,
            },
        })
    }

    pub fn observation(&self) -> Option<&Observation> {
        self.state.as_ref().map(|s| &s.observation)
    }

    pub fn pose(&self) -> Option<Pose> {
        self.state.as_ref().map(|s| s.pose)
    }

    pub fn goal(&self) -> Option<Point> {
        self.state.as_ref().map(|s| s.goal)
    }

    pub fn world(&self) -> Option<&Arc<WorldSpec>> {
        self.state.as_ref().map(|s| &s.world)
    }

    pub fn steps(&self) -> usize {
        self.state.as_ref().map_or(0, |s| s.steps)
    }

    /// Meters travelled so far this episode.
    pub fn path_length(&self) -> f64 {
        self.state.as_ref().map_or(0.0, |s| s.path_length)
    }

    pub fn is_done(&self) -> bool {
        self.state.as_ref().is_some_and(|s| s.done)
    }
}
