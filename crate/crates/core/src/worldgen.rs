//! Random cluttered arenas: a start zone on the left, a goal zone on the
//! right and rectangles and circles scattered over a band between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::eval::{astar_shortest, rasterize};
use crate::rollout::derive_seed;
use crate::world::{Shape, WorldSpec};

pub const MAX_WORLD_ATTEMPTS: usize = 100;
/// Grid cell size used for the reachability check, meters.
pub const REACHABILITY_CELL: f64 = 0.05;

const WORLD_STREAM: u64 = 201;
const PLACEMENT_ATTEMPTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldGenParams {
    pub width: f64,
    pub height: f64,
    pub robot_radius: f64,
    pub start_region: Shape,
    pub goal_region: Shape,
    /// Obstacles are placed with their bounding boxes inside this band.
    pub clutter_region: Shape,
    /// Target fraction of the clutter band covered by obstacles.
    pub density: f64,
    pub rect_side: [f64; 2],
    pub circle_radius: [f64; 2],
    pub circle_fraction: f64,
    /// Free margin kept between obstacles and the start/goal regions,
    /// on top of the robot radius.
    pub region_clearance: f64,
}

impl Default for WorldGenParams {
    fn default() -> Self {
        Self {
            width: 12.0,
            height: 8.0,
            robot_radius: 0.2,
            start_region: Shape::rect(-4.5, -2.5, -3.5, 2.5),
            goal_region: Shape::rect(3.0, -2.5, 4.0, 2.5),
            clutter_region: Shape::rect(-1.5, -4.0, 2.0, 4.0),
            density: 0.04,
            rect_side: [0.3, 0.8],
            circle_radius: [0.3, 0.8],
            circle_fraction: 1.0,
            region_clearance: 0.3,
        }
    }
}

impl WorldGenParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.density) {
            return Err(config_err(format!("density {} outside [0, 1)", self.density)));
        }
        if !(0.0..=1.0).contains(&self.circle_fraction) {
            return Err(config_err("circle_fraction outside [0, 1]"));
        }
        for (name, [lo, hi]) in [("rect_side", self.rect_side), ("circle_radius", self.circle_radius)] {
            if !(lo > 0.0 && lo <= hi) {
                return Err(config_err(format!("{name} range [{lo}, {hi}] is invalid")));
            }
        }
        if self.region_clearance < 0.0 {
            return Err(config_err("region_clearance must be non-negative"));
        }
        // validates arena size, radius and region placement
        self.build(Vec::new())?;
        Ok(())
    }

    fn build(&self, obstacles: Vec<Shape>) -> Result<WorldSpec> {
        WorldSpec::new(
            self.width,
            self.height,
            obstacles,
            self.robot_radius,
            self.start_region.clone(),
            self.goal_region.clone(),
        )
    }

    fn draw_obstacle(&self, rng: &mut ChaCha8Rng) -> Shape {
        let (x0, y0, x1, y1) = self.clutter_region.bounds();
        if rng.random::<f64>() < self.circle_fraction {
            let r = rng.random_range(self.circle_radius[0]..=self.circle_radius[1]);
            let cx = rng.random_range((x0 + r).min(x1 - r)..=(x1 - r).max(x0 + r));
            let cy = rng.random_range((y0 + r).min(y1 - r)..=(y1 - r).max(y0 + r));
            Shape::circle(cx, cy, r)
        } else {
            let w = rng.random_range(self.rect_side[0]..=self.rect_side[1]);
            let h = rng.random_range(self.rect_side[0]..=self.rect_side[1]);
            let x = rng.random_range(x0..=(x1 - w).max(x0));
            let y = rng.random_range(y0..=(y1 - h).max(y0));
            Shape::rect(x, y, x + w, y + h)
        }
    }

    fn placeable(&self, shape: &Shape) -> bool {
        let margin = self.robot_radius + self.region_clearance;
        let (x0, y0, x1, y1) = shape.bounds();
        let inside = x0 >= -self.width / 2.0 && x1 <= self.width / 2.0 && y0 >= -self.height / 2.0 && y1 <= self.height / 2.0;
        inside
            && shape.distance_to_shape(&self.start_region) > margin
            && shape.distance_to_shape(&self.goal_region) > margin
    }
}

/// One candidate world; `None` if its goal region is unreachable.
fn draw_world(params: &WorldGenParams, seed: u64) -> Result<Option<WorldSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = params.density * params.clutter_region.area();
    let mut covered = 0.0;
    let mut obstacles = Vec::new();
    let mut attempts = 0;
    while covered < target && attempts < PLACEMENT_ATTEMPTS {
        attempts += 1;
        let shape = params.draw_obstacle(&mut rng);
        if params.placeable(&shape) {
            covered += shape.area();
            obstacles.push(shape);
        }
    }
    let world = params.build(obstacles)?;
    let cols = (params.width / REACHABILITY_CELL).round().max(1.0) as usize;
    let rows = (params.height / REACHABILITY_CELL).round().max(1.0) as usize;
    let grid = rasterize(&world, cols, rows);
    let s = grid.cell_of(params.start_region.center());
    let g = grid.cell_of(params.goal_region.center());
    if grid.is_occupied(s) || grid.is_occupied(g) {
        return Ok(None);
    }
    Ok(astar_shortest(&grid, s, g)?.is_finite().then_some(world))
}

/// World `index` of the suite generated from `seed`. Unreachable draws are
/// resampled up to [`MAX_WORLD_ATTEMPTS`] times.
pub fn generate_world(params: &WorldGenParams, seed: u64, index: usize) -> Result<WorldSpec> {
    params.validate()?;
    for attempt in 0..MAX_WORLD_ATTEMPTS {
        let draw_seed = derive_seed(derive_seed(seed, WORLD_STREAM, index as u64), attempt as u64, 0);
        if let Some(world) = draw_world(params, draw_seed)? {
            return Ok(world);
        }
    }
    Err(config_err(format!(
        "world {index}: no reachable layout after {MAX_WORLD_ATTEMPTS} attempts (density {})",
        params.density
    )))
}

pub fn generate_worlds(params: &WorldGenParams, count: usize, seed: u64) -> Result<Vec<WorldSpec>> {
    (0..count).map(|i| generate_world(params, seed, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_gives_empty_worlds() {
        let p = WorldGenParams {
            density: 0.0,
            ..WorldGenParams::default()
        };
        for w in generate_worlds(&p, 3, 1).unwrap() {
            assert!(w.obstacles().is_empty());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = WorldGenParams::default();
        let a: Vec<String> = generate_worlds(&p, 3, 9).unwrap().iter().map(|w| w.to_toml()).collect();
        let b: Vec<String> = generate_worlds(&p, 3, 9).unwrap().iter().map(|w| w.to_toml()).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn density_roughly_met() {
        let p = WorldGenParams::default();
        let w = generate_world(&p, 4, 0).unwrap();
        let covered: f64 = w.obstacles().iter().map(Shape::area).sum();
        assert!(covered >= p.density * p.clutter_region.area());
    }

    #[test]
    fn impossible_density_is_reported() {
        let p = WorldGenParams {
            // a single disc spanning the arena height walls the regions off
            start_region: Shape::rect(-5.5, -0.5, -5.0, 0.5),
            goal_region: Shape::rect(5.0, -0.5, 5.5, 0.5),
            clutter_region: Shape::rect(-4.0, -4.0, 4.0, 4.0),
            circle_radius: [4.0, 4.0],
            density: 0.5,
            ..WorldGenParams::default()
        };
        for seed in 0..3 {
            let err = generate_world(&p, seed, 0).unwrap_err();
            assert!(err.to_string().contains("no reachable layout"), "{err}");
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad = WorldGenParams {
            rect_side: [1.0, 0.5],
            ..WorldGenParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = WorldGenParams {
            density: -0.1,
            ..WorldGenParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
