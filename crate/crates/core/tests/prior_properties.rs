use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrn::env::goal_polar;
use rrn::eval::{tune_check, EvalSettings};
use rrn::prior::{prior_command, PriorParams};
use rrn::world::{scan, LaserConfig, Point, Pose, Shape, WorldSpec};
use rrn::worldgen::{generate_worlds, WorldGenParams};

fn rotate(p: Point, phi: f64) -> Point {
    let (s, c) = phi.sin_cos();
    Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// Circles around the origin in an arena whose walls lie beyond the laser.
fn scene(circles: &[(Point, f64)], phi: f64) -> WorldSpec {
    let obstacles = circles
        .iter()
        .map(|&(c, r)| {
            let c = rotate(c, phi);
            Shape::circle(c.x, c.y, r)
        })
        .collect();
    let region = Shape::circle(0.0, 0.0, 0.05);
    WorldSpec::new(30.0, 30.0, obstacles, 0.2, region, region).unwrap()
}

#[test]
fn rotating_the_scene_leaves_the_command_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let laser = LaserConfig::default();
    let params = PriorParams::default();
    for _ in 0..50 {
        let circles: Vec<(Point, f64)> = (0..rng.random_range(1..6))
            .map(|_| {
                let d = rng.random_range(0.7..4.0);
                let a = rng.random_range(-3.1..3.1);
                (Point::new(d * f64::cos(a), d * f64::sin(a)), rng.random_range(0.1..0.4))
            })
            .collect();
        let heading = rng.random_range(-3.1..3.1);
        let goal = Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let command = |phi: f64| {
            let world = scene(&circles, phi);
            let pose = Pose::new(0.0, 0.0, heading + phi);
            let (angle, dist) = goal_polar(&pose, rotate(goal, phi));
            prior_command(&scan(&pose, &laser, &world).unwrap(), angle, dist, &params)
        };
        let base = command(0.0);
        for phi in [0.3, 1.7, -2.4] {
            let rotated = command(phi);
            assert!((rotated.v - base.v).abs() < 1e-9 && (rotated.omega - base.omega).abs() < 1e-9, "{base:?} vs {rotated:?} at {phi}");
        }
    }
}

#[test]
fn default_gains_pass_the_tuning_check_on_the_training_distribution() {
    let worlds: Vec<_> = generate_worlds(&WorldGenParams::default(), 30, 3).unwrap().into_iter().map(Arc::new).collect();
    let success = tune_check(&worlds, 300, 0, &EvalSettings::default()).unwrap();
    assert!(success >= 0.85, "prior success {success}");
}
