//! Evaluation metrics, the A* oracle and the episode suites.

mod grid;
mod metrics;
mod suite;

pub use grid::{
    astar_path, astar_shortest, rasterize, Cell, OccupancyGrid, PathCost, DEFAULT_GRID_COLS, DEFAULT_GRID_ROWS,
    NEIGHBOURS,
};
pub use metrics::{compute_spl, mean_se, spl_term, EpisodeMetrics, MetricsRow, MetricsTable, Scenario, METRICS_FORMAT};
pub use suite::{
    build_controller, episode_rng, evaluate, evaluate_runs, run_suite, run_suite_episode, shortest_between, tune_check, EpisodeOutcome,
    EpisodeSpec, EvalSettings, Suite, DEFAULT_EVAL_EPISODES, EPISODES_PER_GROUP, MIN_TUNE_EPISODES,
};
