use std::fmt::Write as _;

use crate::error::{config_err, Error, Result};
use crate::policy::PolicyMode;

pub const METRICS_FORMAT: &str = "metrics/1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub success: bool,
    /// Meters driven.
    pub path_length: f64,
    /// Grid shortest path at episode start, meters.
    pub shortest_length: f64,
    /// Executed control steps.
    pub actuation_time: usize,
    pub spl_term: f64,
}

impl EpisodeMetrics {
    pub fn new(success: bool, path_length: f64, shortest_length: f64, actuation_time: usize) -> Self {
        Self {
            success,
            path_length,
            shortest_length,
            actuation_time,
            spl_term: spl_term(success, path_length, shortest_length),
        }
    }

    fn spl_defined(&self) -> bool {
        self.shortest_length > 0.0 && self.shortest_length.is_finite()
    }
}

/// `success * L / max(P, L)`; zero for failures and for undefined `L`.
pub fn spl_term(success: bool, path_length: f64, shortest_length: f64) -> f64 {
    if !success || !(shortest_length > 0.0 && shortest_length.is_finite()) {
        return 0.0;
    }
    shortest_length / path_length.max(shortest_length)
}

/// Mean SPL term; episodes without a usable shortest path are dropped
/// with a warning.
pub fn compute_spl(episodes: &[EpisodeMetrics]) -> f64 {
    let kept: Vec<f64> = episodes.iter().filter(|e| e.spl_defined()).map(|e| e.spl_term).collect();
    let dropped = episodes.len() - kept.len();
    if dropped > 0 {
        log::warn!("SPL: excluded {dropped} episode(s) with zero or unreachable shortest path");
    }
    if kept.is_empty() {
        return 0.0;
    }
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Mean and standard error of the mean (sample standard deviation).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    GoalGen,
    EnvGen,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::GoalGen, Scenario::EnvGen];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::GoalGen => "goal_gen",
            Scenario::EnvGen => "env_gen",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| config_err(format!("unknown scenario {s:?} (expected goal_gen or env_gen)")))
    }
}

/// Aggregate over every episode of one (scenario, mode) pair, failures
/// included. Each mean carries its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scenario: Scenario,
    pub mode: PolicyMode,
    pub episodes: usize,
    pub seeds: usize,
    pub success: (f64, f64),
    pub spl: (f64, f64),
    pub actuation: (f64, f64),
}

impl MetricsRow {
    pub fn from_episodes(scenario: Scenario, mode: PolicyMode, seeds: usize, episodes: &[EpisodeMetrics]) -> Self {
        let success: Vec<f64> = episodes.iter().map(|e| f64::from(u8::from(e.success))).collect();
        let spl: Vec<f64> = episodes.iter().filter(|e| e.spl_defined()).map(|e| e.spl_term).collect();
        let actuation: Vec<f64> = episodes.iter().map(|e| e.actuation_time as f64).collect();
        let spl = (compute_spl(episodes), mean_se(&spl).1);
        Self {
            scenario,
            mode,
            episodes: episodes.len(),
            seeds,
            success: mean_se(&success),
            spl,
            actuation: mean_se(&actuation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn push(&mut self, row: MetricsRow) {
        self.rows.push(row);
    }

    pub fn get(&self, scenario: Scenario, mode: PolicyMode) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.mode == mode)
    }

    /// Fixed-width text report, one row per (scenario, mode).
    pub fn to_report(&self) -> String {
        let mut out = format!("# {METRICS_FORMAT}\n");
        let _ = writeln!(
            out,
            "{:<9} {:<10} {:>8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9}",
            "scenario", "mode", "episodes", "seeds", "success", "succ_se", "spl", "spl_se", "actuation", "act_se"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<9} {:<10} {:>8} {:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>9.2} {:>9.2}",
                r.scenario.as_str(),
                r.mode.as_str(),
                r.episodes,
                r.seeds,
                r.success.0,
                r.success.1,
                r.spl.0,
                r.spl.1,
                r.actuation.0,
                r.actuation.1
            );
        }
        out
    }
}
