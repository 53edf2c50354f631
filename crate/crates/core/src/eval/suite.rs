use std::sync::Arc;

use rand::SeedableRng;

use crate::env::{sample_episode, EpisodeConfig, Env, Terminal};
use crate::error::{config_err, usage_err, Result};
use crate::eval::grid::{astar_shortest, rasterize, OccupancyGrid, DEFAULT_GRID_COLS, DEFAULT_GRID_ROWS};
use crate::eval::metrics::{EpisodeMetrics, MetricsRow, Scenario};
use crate::nn::{Checkpoint, NetRng};
use crate::policy::{Controller, PolicyMode, SwitchConfig};
use crate::prior::PriorParams;
use crate::rollout::{derive_seed, run_episode, Trajectory};
use crate::world::{LaserConfig, Point, Pose, WorldSpec};

/// Episodes sharing one held-out goal (goal_gen) or one world (env_gen).
pub const EPISODES_PER_GROUP: usize = 10;
pub const DEFAULT_EVAL_EPISODES: usize = 150;
pub const MIN_TUNE_EPISODES: usize = 100;

// Seed streams; training draws its episodes from stream 0.
const GOAL_STREAM: u64 = 101;
const START_STREAM: u64 = 102;
const POLICY_STREAM: u64 = 103;

/// Cells searched around an endpoint that rasterised as occupied.
const SNAP_RADIUS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub episode: EpisodeConfig,
    pub laser: LaserConfig,
    pub prior: PriorParams,
    pub switch: SwitchConfig,
    pub grid_cols: usize,
    pub grid_rows: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            episode: EpisodeConfig::default(),
            laser: LaserConfig::default(),
            prior: PriorParams::default(),
            switch: SwitchConfig::default(),
            grid_cols: DEFAULT_GRID_COLS,
            grid_rows: DEFAULT_GRID_ROWS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSpec {
    pub world: usize,
    pub start: Pose,
    pub goal: Point,
    /// Filled in by [`Suite::with_shortest_paths`].
    pub shortest_length: Option<f64>,
}

/// A fixed list of evaluation episodes over a set of worlds.
#[derive(Debug, Clone)]
pub struct Suite {
    pub scenario: Scenario,
    pub seed: u64,
    pub worlds: Vec<Arc<WorldSpec>>,
    pub episodes: Vec<EpisodeSpec>,
}

impl Suite {
    /// `goal_gen`: the worlds are training worlds, and each group of
    /// episodes shares a goal drawn from a stream training never uses.
    /// `env_gen`: the worlds are held out; group `g` runs in world `g mod n`.
    pub fn sample(scenario: Scenario, worlds: &[Arc<WorldSpec>], n_episodes: usize, seed: u64) -> Result<Self> {
        if worlds.is_empty() {
            return Err(config_err("evaluation suite needs at least one world"));
        }
        let mut episodes = Vec::with_capacity(n_episodes);
        let mut goal = None;
        for i in 0..n_episodes {
            let group = i / EPISODES_PER_GROUP;
            let w = group % worlds.len();
            if i % EPISODES_PER_GROUP == 0 && scenario == Scenario::GoalGen {
                goal = Some(sample_episode(&worlds[w], derive_seed(seed, GOAL_STREAM, group as u64))?.1);
            }
            let (start, own_goal) = sample_episode(&worlds[w], derive_seed(seed, START_STREAM, i as u64))?;
            episodes.push(EpisodeSpec {
                world: w,
                start,
                goal: goal.unwrap_or(own_goal),
                shortest_length: None,
            });
        }
        Ok(Self {
            scenario,
            seed,
            worlds: worlds.to_vec(),
            episodes,
        })
    }

    /// Fill in the A* oracle length of every episode.
    pub fn with_shortest_paths(mut self, cols: usize, rows: usize) -> Result<Self> {
        let mut grids: Vec<Option<OccupancyGrid>> = vec![None; self.worlds.len()];
        for ep in &mut self.episodes {
            let grid = grids[ep.world].get_or_insert_with(|| rasterize(&self.worlds[ep.world], cols, rows));
            ep.shortest_length = Some(shortest_between(grid, ep.start.position(), ep.goal)?);
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }
}

/// Oracle length between two points, snapping endpoints whose cell centre
/// falls inside the inflated obstacles onto the nearest free cell.
pub fn shortest_between(grid: &OccupancyGrid, a: Point, b: Point) -> Result<f64> {
    let snap = |p: Point| {
        grid.nearest_free(grid.cell_of(p), SNAP_RADIUS)
            .ok_or_else(|| usage_err(format!("no free grid cell near ({:.3}, {:.3})", p.x, p.y)))
    };
    astar_shortest(grid, snap(a)?, snap(b)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub metrics: EpisodeMetrics,
    pub total_reward: f64,
    pub terminal: Terminal,
}

/// Build the controller for `mode`, checking that the checkpoint matches.
pub fn build_controller(mode: PolicyMode, checkpoint: Option<&Checkpoint>, switch: SwitchConfig) -> Result<Controller> {
    let actor = match (mode.obs_mode(), checkpoint) {
        (None, _) => None,
        (Some(_), None) => return Err(usage_err(format!("mode {mode} needs a checkpoint"))),
        (Some(obs), Some(ckpt)) => {
            if ckpt.mode != obs {
                return Err(usage_err(format!(
                    "mode {mode} uses {}-dim {} observations but the checkpoint was trained in {} mode ({}-dim)",
                    obs.dim(),
                    obs.as_str(),
                    ckpt.mode.as_str(),
                    ckpt.mode.dim()
                )));
            }
            Some(ckpt.actor()?.clone())
        }
    };
    Controller::new(mode, actor, switch)
}

/// Policy RNG for episode `index` of an evaluation with seed `seed`; shared
/// across modes so paired comparisons see the same draws.
pub fn episode_rng(seed: u64, index: usize) -> NetRng {
    NetRng::seed_from_u64(derive_seed(seed, POLICY_STREAM, index as u64))
}

/// Run one suite episode and keep its trajectory.
pub fn run_suite_episode(
    controller: &Controller,
    suite: &Suite,
    index: usize,
    settings: &EvalSettings,
) -> Result<Trajectory> {
    let spec = suite
        .episodes
        .get(index)
        .ok_or_else(|| usage_err(format!("suite has no episode {index}")))?;
    let mut env = Env::new(settings.episode, settings.laser, settings.prior, controller.obs_mode())?;
    env.reset_to(&suite.worlds[spec.world], spec.start, spec.goal)?;
    run_episode(&mut env, controller, &mut episode_rng(suite.seed, index))
}

pub fn run_suite(controller: &Controller, suite: &Suite, settings: &EvalSettings) -> Result<Vec<EpisodeOutcome>> {
    (0..suite.len())
        .map(|i| {
            let traj = run_suite_episode(controller, suite, i, settings)?;
            let shortest = suite.episodes[i].shortest_length.unwrap_or(f64::NAN);
            Ok(EpisodeOutcome {
                metrics: EpisodeMetrics::new(traj.success(), traj.path_length, shortest, traj.actuation_time()),
                total_reward: traj.total_reward(),
                terminal: traj.terminal,
            })
        })
        .collect()
}

/// Evaluate one mode on `n_episodes` per seed and aggregate across seeds.
pub fn evaluate(
    mode: PolicyMode,
    checkpoint: Option<&Checkpoint>,
    scenario: Scenario,
    worlds: &[Arc<WorldSpec>],
    n_episodes: usize,
    seeds: &[u64],
    settings: &EvalSettings,
) -> Result<MetricsRow> {
    let runs: Vec<_> = seeds.iter().map(|&s| (checkpoint, s)).collect();
    let outcomes = evaluate_runs(mode, &runs, scenario, worlds, n_episodes, settings)?;
    let metrics: Vec<_> = outcomes.iter().map(|o| o.metrics).collect();
    Ok(MetricsRow::from_episodes(scenario, mode, seeds.len(), &metrics))
}

/// Per-episode outcomes of `n_episodes` for each `(checkpoint, seed)` run,
/// in run order. Lets every training seed be scored with its own network.
pub fn evaluate_runs(
    mode: PolicyMode,
    runs: &[(Option<&Checkpoint>, u64)],
    scenario: Scenario,
    worlds: &[Arc<WorldSpec>],
    n_episodes: usize,
    settings: &EvalSettings,
) -> Result<Vec<EpisodeOutcome>> {
    if runs.is_empty() {
        return Err(usage_err("evaluate needs at least one seed"));
    }
    let mut all = Vec::with_capacity(n_episodes * runs.len());
    for &(checkpoint, seed) in runs {
        let controller = build_controller(mode, checkpoint, settings.switch)?;
        let suite = Suite::sample(scenario, worlds, n_episodes, seed)?.with_shortest_paths(settings.grid_cols, settings.grid_rows)?;
        all.extend(run_suite(&controller, &suite, settings)?);
    }
    Ok(all)
}

/// Success rate of the prior alone on `n_episodes` drawn from `worlds`.
pub fn tune_check(worlds: &[Arc<WorldSpec>], n_episodes: usize, seed: u64, settings: &EvalSettings) -> Result<f64> {
    if n_episodes < MIN_TUNE_EPISODES {
        return Err(usage_err(format!("tune_check needs at least {MIN_TUNE_EPISODES} episodes")));
    }
    let suite = Suite::sample(Scenario::EnvGen, worlds, n_episodes, seed)?;
    let controller = Controller::new(PolicyMode::PriorOnly, None, settings.switch)?;
    let outcomes = run_suite(&controller, &suite, settings)?;
    Ok(outcomes.iter().filter(|o| o.metrics.success).count() as f64 / outcomes.len() as f64)
}
