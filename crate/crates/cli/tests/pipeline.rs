use std::path::Path;
use std::process::Command;

use rrn::eval::Scenario;
use rrn::nn::Checkpoint;
use rrn::policy::PolicyMode;
use rrn::td3::Td3Config;
use rrn::world::WorldSpec;
use rrn_cli::commands::{self, CHECKPOINT_FILE};
use rrn_cli::config::ExperimentConfig;
use rrn_cli::io::{write_file, TrajectoryFile, TRAJECTORY_FORMAT, TRAJECTORY_HEADER};
use rrn_cli::plot::component_bars;
use tempfile::TempDir;

fn config_text(density: f64, episodes: usize) -> String {
    format!(
        r#"format = "experiment/1"
mode = "residual"
seeds = [1]
output_dir = "runs"

[worlds.generator]
width = 8.0
height = 6.0
start_region = {{ type = "rect", params = {{ x_min = -2.2, y_min = -1.2, x_max = -1.2, y_max = 1.2 }} }}
goal_region = {{ type = "rect", params = {{ x_min = -0.6, y_min = -1.2, x_max = 1.2, y_max = 1.2 }} }}
clutter_region = {{ type = "rect", params = {{ x_min = -4.0, y_min = -3.0, x_max = 4.0, y_max = 3.0 }} }}
density = {density}

[worlds.train]
count = 2
seed = 7

[worlds.held_out]
count = 2
seed = 8

[td3]
hidden = [16, 16]
batch_size = 16
warmup_steps = 100
total_episodes = {episodes}
eval_every = 5
eval_episodes = 4

[eval]
episodes = 10
grid_cols = 160
grid_rows = 120
"#
    )
}

fn setup(density: f64, episodes: usize) -> (TempDir, ExperimentConfig) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("experiment.toml");
    std::fs::write(&path, config_text(density, episodes)).unwrap();
    let config = ExperimentConfig::load(&path).unwrap();
    (dir, config)
}

fn trained(episodes: usize) -> (TempDir, ExperimentConfig, Checkpoint) {
    let (dir, config) = setup(0.05, episodes);
    let (ckpt, _) = commands::train_seed(&config, config.mode, 1, false).unwrap();
    (dir, config, ckpt)
}

#[test]
fn gen_worlds_is_deterministic() {
    let (dir, config) = setup(0.05, 10);
    let a = commands::gen_worlds(&config, &dir.path().join("a")).unwrap();
    let b = commands::gen_worlds(&config, &dir.path().join("b")).unwrap();
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn zero_density_gives_empty_valid_worlds() {
    let (dir, config) = setup(0.0, 10);
    for path in commands::gen_worlds(&config, dir.path()).unwrap() {
        assert!(WorldSpec::load(&path).unwrap().obstacles().is_empty());
    }
}

#[test]
fn training_writes_a_loadable_checkpoint_and_periodic_evals() {
    let (_dir, config) = setup(0.05, 20);
    let (ckpt, log) = commands::train_seed(&config, config.mode, 1, false).unwrap();
    let run = config.run_dir(config.mode, 1);
    let loaded = Checkpoint::load(run.join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(loaded.to_bytes(), ckpt.to_bytes());
    let evals: Vec<u64> = log.records.iter().filter(|r| r.eval.is_some()).map(|r| r.episode).collect();
    assert_eq!(evals, vec![5, 10, 15, 20]);
    let text = std::fs::read_to_string(run.join(commands::TRAINING_LOG_FILE)).unwrap();
    assert_eq!(rrn::td3::TrainingLog::from_csv(&text).unwrap(), log);
}

#[test]
fn resumed_training_matches_an_uninterrupted_run() {
    // A tiny actor step keeps both policies close to the prior, so their
    // evaluations are comparable after so few episodes.
    let (_a, mut full) = setup(0.05, 20);
    full.td3.actor_lr = 1e-6;
    full.td3.eval_episodes = 10;
    let (_, full_log) = commands::train_seed(&full, full.mode, 1, false).unwrap();

    let (_b, mut part) = setup(0.05, 10);
    part.td3 = Td3Config { total_episodes: 10, ..full.td3.clone() };
    commands::train_seed(&part, part.mode, 1, false).unwrap();
    part.td3.total_episodes = 20;
    let (ckpt, log) = commands::train_seed(&part, part.mode, 1, true).unwrap();

    assert_eq!(ckpt.episodes, 20);
    assert_eq!(log.records.iter().map(|r| r.episode).collect::<Vec<_>>(), (1..=20).collect::<Vec<_>>());
    assert_eq!(log.records[..10], full_log.records[..10]);
    let (resumed, uninterrupted) = (log.final_eval().unwrap().0, full_log.final_eval().unwrap().0);
    assert!((resumed - uninterrupted).abs() <= 0.2, "resumed {resumed} vs {uninterrupted}");
}

#[test]
fn report_has_one_row_per_mode_and_scenario_and_is_reproducible() {
    let (dir, config) = setup(0.05, 10);
    let modes = [PolicyMode::PriorOnly, PolicyMode::Random];
    let scenarios = [Scenario::GoalGen, Scenario::EnvGen];
    let out = dir.path().join("report.txt");
    let table = commands::eval(&config, &modes, &scenarios, None, &out).unwrap();
    let first = std::fs::read(&out).unwrap();
    let data_rows = table.to_report().lines().filter(|l| l.starts_with("goal_gen") || l.starts_with("env_gen")).count();
    assert_eq!(data_rows, modes.len() * scenarios.len());
    commands::eval(&config, &modes, &scenarios, None, &out).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn learned_modes_without_a_checkpoint_fail_clearly() {
    let (dir, config) = setup(0.05, 10);
    let err = commands::eval(&config, &[PolicyMode::Srrn], &[Scenario::EnvGen], None, &dir.path().join("r.txt")).unwrap_err();
    assert!(format!("{err:#}").contains("needs a checkpoint"), "{err:#}");
}

#[test]
fn mismatched_checkpoint_is_rejected() {
    let (dir, config, _) = trained(5);
    let ckpt = config.run_dir(config.mode, 1).join(CHECKPOINT_FILE);
    let err = commands::eval(&config, &[PolicyMode::EndToEnd], &[Scenario::EnvGen], Some(&ckpt), &dir.path().join("r.txt")).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("19") && msg.contains("21"), "{msg}");
}

#[test]
fn rollout_columns_are_consistent() {
    let (_dir, config, ckpt) = trained(10);
    let world = config.held_out_worlds().unwrap().remove(0);
    for mode in [PolicyMode::Srrn, PolicyMode::Rrn, PolicyMode::PriorOnly] {
        let ckpt = mode.obs_mode().map(|_| &ckpt);
        let traj = commands::rollout(&config, mode, ckpt, world.clone(), 4).unwrap();
        let parsed = TrajectoryFile::from_csv(&traj.to_csv()).unwrap();
        assert_eq!(parsed, traj);
        for row in &parsed.rows {
            let applied = row.applied_residual();
            let v = (row.v_prior + applied[0]).clamp(-1.0, 1.0);
            let w = (row.omega_prior + applied[1]).clamp(-1.0, 1.0);
            assert_eq!((v, w), (row.v_exec, row.omega_exec), "{mode} step {}", row.t);
            match mode {
                PolicyMode::Srrn => {
                    let eps = row.epsilon.unwrap();
                    assert!((0.0..=1.0).contains(&eps));
                    assert!(row.var.is_some());
                    if row.used_prior_only {
                        assert_eq!((row.v_exec, row.omega_exec), (row.v_prior, row.omega_prior));
                    }
                }
                PolicyMode::Rrn => {
                    assert!(!row.used_prior_only && row.mu.is_some() && row.var.is_none() && row.epsilon.is_none());
                }
                _ => assert!(row.used_prior_only && row.mu.is_none()),
            }
        }
    }
}

fn data_values(svg: &str, class: &str) -> Vec<(usize, f64)> {
    let attr = |tag: &str, name: &str| {
        let start = tag.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
        tag[start..start + tag[start..].find('"').unwrap()].to_string()
    };
    svg.lines()
        .filter(|l| l.starts_with(&format!("<rect class=\"{class}\"")))
        .map(|l| (attr(l, "data-t").parse().unwrap(), attr(l, "data-value").parse().unwrap()))
        .collect()
}

#[test]
fn component_bars_sum_to_the_executed_turn_rate() {
    let (dir, config, ckpt) = trained(10);
    let world = config.held_out_worlds().unwrap().remove(1);
    let traj = commands::rollout(&config, PolicyMode::Srrn, Some(&ckpt), world, 2).unwrap();
    let input = dir.path().join("traj.csv");
    write_file(&input, traj.to_csv()).unwrap();
    let out = dir.path().join("components.svg");
    commands::plot_components(&input, None, &out).unwrap();
    let svg = std::fs::read_to_string(&out).unwrap();
    let prior = data_values(&svg, "prior");
    let residual = data_values(&svg, "residual");
    assert_eq!(prior.len(), traj.rows.len());
    assert_eq!(residual.len(), traj.rows.len());
    for ((row, p), r) in traj.rows.iter().zip(&prior).zip(&residual) {
        assert_eq!((p.0, r.0), (row.t, row.t));
        assert!(((p.1 + r.1).abs() - row.omega_exec.abs()).abs() < 1e-9, "step {}", row.t);
    }
    assert_eq!(component_bars(&traj, Some((0, 3))).unwrap().len(), 4.min(traj.rows.len()));
}

#[test]
fn plots_are_deterministic() {
    let (dir, config, ckpt) = trained(10);
    let worlds = commands::gen_worlds(&config, &dir.path().join("worlds")).unwrap();
    let world_path = worlds.iter().find(|p| p.to_string_lossy().contains("held_out")).unwrap();
    let world = std::sync::Arc::new(WorldSpec::load(world_path).unwrap());
    let traj = commands::rollout(&config, PolicyMode::Srrn, Some(&ckpt), world, 1).unwrap();
    let input = dir.path().join("traj.csv");
    write_file(&input, traj.to_csv()).unwrap();
    let render = |name: &str| {
        let out = dir.path().join(name);
        commands::plot_trajectory(&input, world_path, (160, 120), 0.2, &out).unwrap();
        std::fs::read(out).unwrap()
    };
    let svg = render("a.svg");
    assert_eq!(svg, render("b.svg"));
    let text = String::from_utf8(svg).unwrap();
    assert!(text.contains("id=\"astar\""));
}

#[test]
fn empty_trajectory_gives_an_error_and_no_figure() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty.csv");
    std::fs::write(&input, format!("# {TRAJECTORY_FORMAT} mode=srrn goal=0,0 final=0,0,0\n{TRAJECTORY_HEADER}\n")).unwrap();
    let out = dir.path().join("out.svg");
    assert!(commands::plot_components(&input, None, &out).is_err());
    assert!(!out.exists());
    std::fs::write(&input, "").unwrap();
    assert!(commands::plot_components(&input, None, &out).is_err());
    assert!(!out.exists());
}

fn rrn(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rrn")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn binary_reports_errors_on_one_line() {
    let dir = TempDir::new().unwrap();
    let out = rrn(dir.path(), &["eval", "--config", "missing.toml", "--modes", "prior_only"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("rrn: error:"), "{stderr}");
}

#[test]
fn binary_writes_a_report() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("experiment.toml"), config_text(0.05, 10)).unwrap();
    let out = rrn(dir.path(), &["eval", "--config", "experiment.toml", "--modes", "prior_only", "--scenarios", "env_gen"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("runs/eval/report.txt")).unwrap();
    assert!(report.starts_with("# metrics/1"));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), report);
}
