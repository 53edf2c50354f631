//! Argument parsing and dispatch.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rrn::env::ObsMode;
use rrn::eval::Scenario;
use rrn::nn::Checkpoint;
use rrn::policy::PolicyMode;
use rrn::world::WorldSpec;
use std::sync::Arc;

use crate::commands;
use crate::config::ExperimentConfig;
use crate::io::write_file;
use crate::plot::CurveMetric;

#[derive(Debug, Parser)]
#[command(name = "rrn", version, about = "Residual reactive navigation: train, evaluate and plot")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the config's world sets as world/1 files.
    GenWorlds {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: <output_dir>/worlds).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train with TD3, one run per seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Observation mode (default: the config's).
        #[arg(long)]
        mode: Option<ObsModeArg>,
        /// Seeds to train (default: the config's).
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Continue from the last periodic checkpoint of each run.
        #[arg(long)]
        resume: bool,
    },
    /// Evaluate controllers and write a metrics report.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<PolicyMode>,
        #[arg(long, value_delimiter = ',', default_value = "goal_gen,env_gen")]
        scenarios: Vec<Scenario>,
        /// Checkpoint for all seeds (default: each seed's training run).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Report path (default: <output_dir>/eval/report.txt).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record one episode as a trajectory CSV.
    Rollout {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: PolicyMode,
        /// Checkpoint (default: the training run of the first config seed).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        world: WorldArg,
        /// Seed for the start/goal draw and the switching draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an SVG figure.
    Plot {
        #[command(subcommand)]
        kind: PlotKind,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct WorldArg {
    /// A world/1 file.
    #[arg(long)]
    world: Option<PathBuf>,
    /// Index into the config's held-out worlds.
    #[arg(long)]
    held_out: Option<usize>,
    /// Index into the config's training worlds.
    #[arg(long)]
    train_world: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObsModeArg {
    Residual,
    EndToEnd,
}

impl From<ObsModeArg> for ObsMode {
    fn from(m: ObsModeArg) -> Self {
        match m {
            ObsModeArg::Residual => ObsMode::Residual,
            ObsModeArg::EndToEnd => ObsMode::EndToEnd,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    PathLength,
    EvalSuccess,
}

#[derive(Debug, Subcommand)]
pub enum PlotKind {
    /// Path coloured by controller, with the A* shortest path.
    Trajectory {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        world: PathBuf,
        /// Grid and goal radius come from this config if given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stacked prior/residual angular velocity with the uncertainty.
    Components {
        #[arg(long)]
        input: PathBuf,
        /// First and last timestep to show.
        #[arg(long, num_args = 2, value_names = ["FROM", "TO"])]
        range: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean and range across seeds of training logs.
    TrainingCurve {
        /// LABEL=LOG[,LOG...]; repeat for several series.
        #[arg(long = "series", required = true)]
        series: Vec<String>,
        #[arg(long, value_enum, default_value = "path-length")]
        metric: MetricArg,
        /// Trailing moving-average window, in episodes.
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_series(spec: &str) -> Result<(String, Vec<PathBuf>)> {
    let (label, files) = spec.split_once('=').ok_or_else(|| anyhow!("series {spec:?} is not LABEL=LOG[,LOG...]"))?;
    let files: Vec<PathBuf> = files.split(',').filter(|f| !f.is_empty()).map(PathBuf::from).collect();
    if label.is_empty() || files.is_empty() {
        bail!("series {spec:?} is not LABEL=LOG[,LOG...]");
    }
    Ok((label.to_string(), files))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenWorlds { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.output_dir().join("worlds"));
            let written = commands::gen_worlds(&config, &out)?;
            log::info!("wrote {} worlds under {}", written.len(), out.display());
        }
        Command::Train { config, mode, seeds, resume } => {
            let config = ExperimentConfig::load(&config)?;
            let mode = mode.map_or(config.mode, ObsMode::from);
            let seeds = if seeds.is_empty() { config.seeds.clone() } else { seeds };
            commands::train(&config, mode, &seeds, resume)?;
        }
        Command::Eval {
            config,
            modes,
            scenarios,
            checkpoint,
            out,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.output_dir().join("eval").join("report.txt"));
            let table = commands::eval(&config, &modes, &scenarios, checkpoint.as_deref(), &out)?;
            print!("{}", table.to_report());
        }
        Command::Rollout {
            config,
            mode,
            checkpoint,
            world,
            seed,
            out,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let world = match (world.world, world.held_out, world.train_world) {
                (Some(path), _, _) => Arc::new(WorldSpec::load(&path).with_context(|| format!("loading world {}", path.display()))?),
                (_, Some(i), _) => pick(config.held_out_worlds()?, i, "held-out")?,
                (_, _, Some(i)) => pick(config.train_worlds()?, i, "training")?,
                _ => bail!("pass --world, --held-out or --train-world"),
            };
            let ckpt: Option<Checkpoint> = commands::checkpoint_for(&config, mode, config.seeds[0], checkpoint.as_deref())?;
            let traj = commands::rollout(&config, mode, ckpt.as_ref(), world, seed)?;
            write_file(&out, traj.to_csv())?;
        }
        Command::Plot { kind } => match kind {
            PlotKind::Trajectory { input, world, config, out } => {
                let (grid, radius) = match config {
                    Some(c) => {
                        let c = ExperimentConfig::load(&c)?;
                        ((c.eval.grid_cols, c.eval.grid_rows), c.episode.d_threshold)
                    }
                    None => {
                        let e = crate::config::EvalConfig::default();
                        ((e.grid_cols, e.grid_rows), rrn::env::EpisodeConfig::default().d_threshold)
                    }
                };
                commands::plot_trajectory(&input, &world, grid, radius, &out)?;
            }
            PlotKind::Components { input, range, out } => {
                let range = range.map(|r| (r[0], r[1]));
                commands::plot_components(&input, range, &out)?;
            }
            PlotKind::TrainingCurve {
                series,
                metric,
                window,
                out,
            } => {
                let series: Vec<_> = series.iter().map(|s| parse_series(s)).collect::<Result<_>>()?;
                let metric = match metric {
                    MetricArg::PathLength => CurveMetric::PathLength,
                    MetricArg::EvalSuccess => CurveMetric::EvalSuccess,
                };
                commands::plot_training_curve(&series, metric, window, &out)?;
            }
        },
    }
    Ok(())
}

fn pick(worlds: Vec<Arc<WorldSpec>>, i: usize, what: &str) -> Result<Arc<WorldSpec>> {
    let n = worlds.len();
    worlds.into_iter().nth(i).ok_or_else(|| anyhow!("there are only {n} {what} worlds"))
}
