//! `experiment/1` TOML configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rrn::env::{EpisodeConfig, ObsMode};
use rrn::eval::{EvalSettings, DEFAULT_EVAL_EPISODES, DEFAULT_GRID_COLS, DEFAULT_GRID_ROWS};
use rrn::policy::SwitchConfig;
use rrn::prior::PriorParams;
use rrn::td3::Td3Config;
use rrn::world::{LaserConfig, WorldSpec};
use rrn::worldgen::{generate_worlds, WorldGenParams};
use serde::{Deserialize, Serialize};

pub const EXPERIMENT_FORMAT: &str = "experiment/1";

/// A set of worlds: explicit `world/1` files, or `count` generated worlds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WorldSet {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldsConfig {
    #[serde(default)]
    pub generator: WorldGenParams,
    /// Training worlds; goal_gen evaluates on these.
    pub train: WorldSet,
    /// Unseen worlds for env_gen.
    pub held_out: WorldSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Episodes per seed and scenario.
    pub episodes: usize,
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub switch: SwitchConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            episodes: DEFAULT_EVAL_EPISODES,
            grid_cols: DEFAULT_GRID_COLS,
            grid_rows: DEFAULT_GRID_ROWS,
            switch: SwitchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format: String,
    /// Observation mode trained by `train`.
    pub mode: ObsMode,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub worlds: WorldsConfig,
    #[serde(default)]
    pub episode: EpisodeConfig,
    #[serde(default)]
    pub laser: LaserConfig,
    #[serde(default)]
    pub prior: PriorParams,
    #[serde(default)]
    pub td3: Td3Config,
    #[serde(default)]
    pub eval: EvalConfig,
    /// Directory relative paths resolve against; the config file's own.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| anyhow::anyhow!("{}", one_line(&e.to_string())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != EXPERIMENT_FORMAT {
            bail!("unsupported config format {:?} (expected {EXPERIMENT_FORMAT:?})", self.format);
        }
        if self.seeds.is_empty() {
            bail!("seeds must not be empty");
        }
        self.episode.validate()?;
        self.laser.validate()?;
        self.prior.validate(self.laser.max_range)?;
        if self.td3.gamma != self.episode.gamma {
            bail!("td3.gamma ({}) and episode.gamma ({}) must agree", self.td3.gamma, self.episode.gamma);
        }
        self.td3.validate()?;
        self.worlds.generator.validate()?;
        for (name, set) in [("train", &self.worlds.train), ("held_out", &self.worlds.held_out)] {
            if set.files.is_empty() == (set.count == 0) {
                bail!("worlds.{name} needs exactly one of a non-empty `files` list or `count` > 0");
            }
        }
        if self.eval.episodes == 0 || self.eval.grid_cols == 0 || self.eval.grid_rows == 0 {
            bail!("eval episodes and grid size must be positive");
        }
        if self.eval.switch.n_passes == 0 {
            bail!("eval.switch.n_passes must be positive");
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn run_dir(&self, mode: ObsMode, seed: u64) -> PathBuf {
        self.output_dir().join("train").join(mode.as_str()).join(format!("seed_{seed}"))
    }

    pub fn settings(&self) -> EvalSettings {
        EvalSettings {
            episode: self.episode,
            laser: self.laser,
            prior: self.prior,
            switch: self.eval.switch,
            grid_cols: self.eval.grid_cols,
            grid_rows: self.eval.grid_rows,
        }
    }

    pub fn load_worlds(&self, set: &WorldSet) -> Result<Vec<Arc<WorldSpec>>> {
        let worlds = if set.files.is_empty() {
            generate_worlds(&self.worlds.generator, set.count, set.seed)?
        } else {
            set.files
                .iter()
                .map(|f| {
                    let path = self.resolve(f);
                    WorldSpec::load(&path).with_context(|| format!("loading world {}", path.display()))
                })
                .collect::<Result<_>>()?
        };
        Ok(worlds.into_iter().map(Arc::new).collect())
    }

    pub fn train_worlds(&self) -> Result<Vec<Arc<WorldSpec>>> {
        self.load_worlds(&self.worlds.train)
    }

    pub fn held_out_worlds(&self) -> Result<Vec<Arc<WorldSpec>>> {
        self.load_worlds(&self.worlds.held_out)
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}
