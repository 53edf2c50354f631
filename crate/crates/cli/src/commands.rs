//! The five subcommands as library functions.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use log::info;
use rrn::env::{Env, ObsMode};
use rrn::eval::{build_controller, episode_rng, evaluate_runs, EpisodeOutcome, MetricsRow, MetricsTable, Scenario};
use rrn::nn::Checkpoint;
use rrn::policy::PolicyMode;
use rrn::rollout::run_episode;
use rrn::td3::{Trainer, TrainingLog};
use rrn::world::WorldSpec;

use crate::config::ExperimentConfig;
use crate::io::{write_file, TrajectoryFile};
use crate::plot::{self, CurveMetric};

pub const CHECKPOINT_FILE: &str = "checkpoint.ckpt";
pub const TRAINING_LOG_FILE: &str = "training_log.csv";

/// Write every generated world set of the config as `world/1` files under
/// `out/{train,held_out}/`. Returns the written paths.
pub fn gen_worlds(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, set) in [("train", &config.worlds.train), ("held_out", &config.worlds.held_out)] {
        if !set.files.is_empty() {
            info!("worlds.{name} lists files; nothing to generate");
            continue;
        }
        for (i, world) in config.load_worlds(set)?.iter().enumerate() {
            let path = out.join(name).join(format!("world_{i:03}.toml"));
            write_file(&path, world.to_toml())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Replace `path` only once the new contents are fully written.
fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    write_file(&tmp, contents)?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))
}

fn save_run(dir: &Path, checkpoint: &Checkpoint, log: &TrainingLog) -> Result<()> {
    write_atomic(&dir.join(CHECKPOINT_FILE), checkpoint.to_bytes())?;
    write_atomic(&dir.join(TRAINING_LOG_FILE), log.to_csv())
}

/// Train one seed, writing the checkpoint and log at every evaluation
/// point. With `resume`, continue from the run directory's last periodic
/// checkpoint (fresh replay buffer and optimiser state).
pub fn train_seed(config: &ExperimentConfig, mode: ObsMode, seed: u64, resume: bool) -> Result<(Checkpoint, TrainingLog)> {
    let dir = config.run_dir(mode, seed);
    let worlds = config.train_worlds()?;
    let ckpt_path = dir.join(CHECKPOINT_FILE);
    let mut trainer = if resume && ckpt_path.exists() {
        let ckpt = Checkpoint::load(&ckpt_path).with_context(|| format!("loading {}", ckpt_path.display()))?;
        if ckpt.mode != mode {
            bail!("{} was trained in {} mode, not {}", ckpt_path.display(), ckpt.mode.as_str(), mode.as_str());
        }
        let log_path = dir.join(TRAINING_LOG_FILE);
        let text = std::fs::read_to_string(&log_path).with_context(|| format!("reading {}", log_path.display()))?;
        let log = TrainingLog::from_csv(&text).with_context(|| format!("parsing {}", log_path.display()))?;
        info!("seed {seed}: resuming {} training at episode {}", mode.as_str(), ckpt.episodes);
        Trainer::resume(worlds, config.td3.clone(), config.settings(), &ckpt, log, seed)?
    } else {
        Trainer::new(worlds, config.td3.clone(), config.settings(), mode, seed)?
    };
    trainer.run(|t| {
        if let Some((success, spl)) = t.log().final_eval() {
            info!("seed {seed} episode {}: eval success {success:.3}, SPL {spl:.3}", t.episode());
        }
        save_run(&dir, &t.checkpoint(), t.log()).map_err(|e| rrn::Error::Format(format!("{e:#}")))
    })?;
    let (ckpt, log) = (trainer.checkpoint(), trainer.log().clone());
    save_run(&dir, &ckpt, &log)?;
    Ok((ckpt, log))
}

pub fn train(config: &ExperimentConfig, mode: ObsMode, seeds: &[u64], resume: bool) -> Result<()> {
    for &seed in seeds {
        train_seed(config, mode, seed, resume)?;
    }
    Ok(())
}

fn scenario_worlds(config: &ExperimentConfig, scenario: Scenario) -> Result<Vec<Arc<WorldSpec>>> {
    match scenario {
        Scenario::GoalGen => config.train_worlds(),
        Scenario::EnvGen => config.held_out_worlds(),
    }
}

/// Checkpoint used for `seed`: the explicit one, else the run directory's.
pub fn checkpoint_for(config: &ExperimentConfig, mode: PolicyMode, seed: u64, explicit: Option<&Path>) -> Result<Option<Checkpoint>> {
    let Some(obs) = mode.obs_mode() else {
        return Ok(None);
    };
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => config.run_dir(obs, seed).join(CHECKPOINT_FILE),
    };
    if !path.exists() {
        bail!("mode {mode} needs a checkpoint but {} does not exist (run `rrn train` or pass --checkpoint)", path.display());
    }
    Ok(Some(Checkpoint::load(&path).with_context(|| format!("loading {}", path.display()))?))
}

/// Per-episode outcomes for every (scenario, mode) pair, one run per seed.
pub fn eval_outcomes(
    config: &ExperimentConfig,
    modes: &[PolicyMode],
    scenarios: &[Scenario],
    checkpoint: Option<&Path>,
) -> Result<Vec<(Scenario, PolicyMode, Vec<EpisodeOutcome>)>> {
    let mut out = Vec::new();
    for &scenario in scenarios {
        let worlds = scenario_worlds(config, scenario)?;
        for &mode in modes {
            let ckpts: Vec<Option<Checkpoint>> = config
                .seeds
                .iter()
                .map(|&s| checkpoint_for(config, mode, s, checkpoint))
                .collect::<Result<_>>()?;
            let runs: Vec<_> = ckpts.iter().zip(&config.seeds).map(|(c, &s)| (c.as_ref(), s)).collect();
            info!("evaluating {mode} on {}", scenario.as_str());
            let outcomes = evaluate_runs(mode, &runs, scenario, &worlds, config.eval.episodes, &config.settings())?;
            out.push((scenario, mode, outcomes));
        }
    }
    Ok(out)
}

pub fn metrics_table(config: &ExperimentConfig, outcomes: &[(Scenario, PolicyMode, Vec<EpisodeOutcome>)]) -> MetricsTable {
    let mut table = MetricsTable::default();
    for (scenario, mode, eps) in outcomes {
        let metrics: Vec<_> = eps.iter().map(|o| o.metrics).collect();
        table.push(MetricsRow::from_episodes(*scenario, *mode, config.seeds.len(), &metrics));
    }
    table
}

pub fn eval(config: &ExperimentConfig, modes: &[PolicyMode], scenarios: &[Scenario], checkpoint: Option<&Path>, out: &Path) -> Result<MetricsTable> {
    let table = metrics_table(config, &eval_outcomes(config, modes, scenarios, checkpoint)?);
    write_file(out, table.to_report())?;
    Ok(table)
}

/// Record one episode of `mode` in `world` with start and goal drawn from
/// `seed`.
pub fn rollout(config: &ExperimentConfig, mode: PolicyMode, checkpoint: Option<&Checkpoint>, world: Arc<WorldSpec>, seed: u64) -> Result<TrajectoryFile> {
    let controller = build_controller(mode, checkpoint, config.eval.switch)?;
    let mut env = Env::new(config.episode, config.laser, config.prior, controller.obs_mode())?;
    env.reset(&world, seed)?;
    let traj = run_episode(&mut env, &controller, &mut episode_rng(seed, 0))?;
    Ok(TrajectoryFile::from_trajectory(mode, &traj))
}

pub fn plot_trajectory(traj_path: &Path, world_path: &Path, grid: (usize, usize), goal_radius: f64, out: &Path) -> Result<()> {
    let traj = TrajectoryFile::load(traj_path)?;
    let world = WorldSpec::load(world_path).with_context(|| format!("loading world {}", world_path.display()))?;
    let astar = plot::astar_overlay(&world, traj.rows[0].pose.position(), traj.goal, grid.0, grid.1)?;
    write_file(out, plot::trajectory_svg(&world, &traj, astar.as_deref(), goal_radius))
}

pub fn plot_components(traj_path: &Path, range: Option<(usize, usize)>, out: &Path) -> Result<()> {
    let traj = TrajectoryFile::load(traj_path)?;
    let bars = plot::component_bars(&traj, range)?;
    write_file(out, plot::components_svg(&bars))
}

/// `series` pairs a label with one training log per seed.
pub fn plot_training_curve(series: &[(String, Vec<PathBuf>)], metric: CurveMetric, window: usize, out: &Path) -> Result<()> {
    if series.is_empty() {
        bail!("no training logs given");
    }
    let mut bands = Vec::new();
    for (label, files) in series {
        let logs: Vec<TrainingLog> = files
            .iter()
            .map(|f| {
                let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
                if text.trim().is_empty() {
                    bail!("{}: empty training log", f.display());
                }
                TrainingLog::from_csv(&text).with_context(|| format!("parsing {}", f.display()))
            })
            .collect::<Result<_>>()?;
        bands.push((label.clone(), plot::curve_band(&logs, metric, window).with_context(|| format!("series {label}"))?));
    }
    write_file(out, plot::training_curve_svg(&bands, metric))
}
