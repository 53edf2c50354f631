use std::sync::Arc;

use rrn::env::ObsMode;
use rrn::eval::{tune_check, EvalSettings};
use rrn::td3::{train, Td3Config};
use rrn::world::Shape;
use rrn::worldgen::{generate_worlds, WorldGenParams};

#[test]
fn residual_training_beats_the_prior_on_three_worlds() {
    let params = WorldGenParams {
        width: 8.0,
        height: 6.0,
        start_region: Shape::rect(-2.2, -1.2, -1.2, 1.2),
        goal_region: Shape::rect(-0.6, -1.2, 1.2, 1.2),
        clutter_region: Shape::rect(-4.0, -3.0, 4.0, 3.0),
        density: 0.05,
        ..WorldGenParams::default()
    };
    let worlds: Vec<_> = generate_worlds(&params, 3, 7).unwrap().into_iter().map(Arc::new).collect();
    let config = Td3Config {
        hidden: vec![64, 64],
        batch_size: 64,
        actor_lr: 1e-4,
        critic_lr: 3e-4,
        total_episodes: 1000,
        eval_every: 100,
        eval_episodes: 10,
        ..Td3Config::default()
    };
    let settings = EvalSettings {
        grid_cols: 400,
        grid_rows: 300,
        ..EvalSettings::default()
    };
    let (_, log) = train(worlds.clone(), config, settings.clone(), ObsMode::Residual, 1).unwrap();
    let last = &log.records[log.records.len() - 100..];
    let trained = last.iter().filter(|r| r.success).count() as f64 / 100.0;
    let prior = tune_check(&worlds, 100, 1, &settings).unwrap();
    assert!(trained >= 0.9, "final 100-episode success {trained}");
    assert!(trained >= prior, "trained {trained} < prior {prior}");
}
