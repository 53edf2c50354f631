//! Immutable arena geometry and the pure queries the simulator needs:
//! unicycle integration, analytic ray casting against rectangles, circles
//! and the arena walls, and disc collision checks.
//!
//! The arena is centred on the origin and spans `[-width/2, width/2] x
//! [-height/2, height/2]`.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

/// Format tag written into every world file.
pub const WORLD_FORMAT: &str = "world/1";

/// Ray hits closer than this are reported as this value so scans stay
/// strictly positive even when the sensor origin touches an obstacle.
pub const MIN_RANGE: f64 = 1e-6;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Planar robot pose; `theta` is kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum Shape {
    Rect {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
    },
}

impl Shape {
    pub fn rect(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Shape::Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn circle(cx: f64, cy: f64, r: f64) -> Self {
        Shape::Circle { cx, cy, r }
    }

    fn is_well_formed(&self) -> bool {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => {
                [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite())
                    && x_min <= x_max
                    && y_min <= y_max
            }
            Shape::Circle { cx, cy, r } => cx.is_finite() && cy.is_finite() && r.is_finite() && r >= 0.0,
        }
    }

    /// `(x_min, y_min, x_max, y_max)`
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => (x_min, y_min, x_max, y_max),
            Shape::Circle { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => Point::new(0.5 * (x_min + x_max), 0.5 * (y_min + y_max)),
            Shape::Circle { cx, cy, .. } => Point::new(cx, cy),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => (x_max - x_min) * (y_max - y_min),
            Shape::Circle { r, .. } => PI * r * r,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.distance(p) <= 0.0
    }

    /// Euclidean distance from `p` to the shape; zero inside.
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => {
                let dx = (x_min - p.x).max(0.0).max(p.x - x_max);
                let dy = (y_min - p.y).max(0.0).max(p.y - y_max);
                dx.hypot(dy)
            }
            Shape::Circle { cx, cy, r } => ((p.x - cx).hypot(p.y - cy) - r).max(0.0),
        }
    }

    /// Minimum distance between two shapes; zero when they overlap.
    pub fn distance_to_shape(&self, other: &Shape) -> f64 {
        match (*self, *other) {
            (Shape::Circle { cx, cy, r }, _) => (other.distance(Point::new(cx, cy)) - r).max(0.0),
            (_, Shape::Circle { cx, cy, r }) => (self.distance(Point::new(cx, cy)) - r).max(0.0),
            (
                Shape::Rect {
                    x_min: ax0,
                    y_min: ay0,
                    x_max: ax1,
                    y_max: ay1,
                },
                Shape::Rect {
                    x_min: bx0,
                    y_min: by0,
                    x_max: bx1,
                    y_max: by1,
                },
            ) => {
                let dx = (ax0 - bx1).max(bx0 - ax1).max(0.0);
                let dy = (ay0 - by1).max(by0 - ay1).max(0.0);
                dx.hypot(dy)
            }
        }
    }

    /// Parameter `t >= 0` of the first point where the ray `origin + t*dir`
    /// (unit `dir`) touches the shape, or `Some(0)` when the origin is inside.
    pub fn ray_hit(&self, origin: Point, dir: (f64, f64)) -> Option<f64> {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                for (o, d, lo, hi) in [(origin.x, dir.0, x_min, x_max), (origin.y, dir.1, y_min, y_max)] {
                    if d == 0.0 {
                        if o < lo || o > hi {
                            return None;
                        }
                    } else {
                        let t1 = (lo - o) / d;
                        let t2 = (hi - o) / d;
                        t_near = t_near.max(t1.min(t2));
                        t_far = t_far.min(t1.max(t2));
                    }
                }
                if t_far < t_near.max(0.0) {
                    None
                } else {
                    Some(t_near.max(0.0))
                }
            }
            Shape::Circle { cx, cy, r } => {
                let ox = origin.x - cx;
                let oy = origin.y - cy;
                let b = ox * dir.0 + oy * dir.1;
                let c = ox * ox + oy * oy - r * r;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let t = -b - disc.sqrt();
                (t >= 0.0).then_some(t)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Shape::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => Point::new(
                x_min + (x_max - x_min) * rng.random::<f64>(),
                y_min + (y_max - y_min) * rng.random::<f64>(),
            ),
            Shape::Circle { cx, cy, r } => {
                let rho = r * rng.random::<f64>().sqrt();
                let phi = 2.0 * PI * rng.random::<f64>();
                Point::new(cx + rho * phi.cos(), cy + rho * phi.sin())
            }
        }
    }
}

/// On-disk layout of a world file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldFile {
    version: String,
    width: f64,
    height: f64,
    robot_radius: f64,
    start_region: Shape,
    goal_region: Shape,
    #[serde(default)]
    obstacles: Vec<Shape>,
}

/// Validated arena description. Immutable once built; share it behind an
/// `Arc` between episode runners.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    width: f64,
    height: f64,
    obstacles: Vec<Shape>,
    robot_radius: f64,
    start_region: Shape,
    goal_region: Shape,
}

impl WorldSpec {
    pub fn new(
        width: f64,
        height: f64,
        obstacles: Vec<Shape>,
        robot_radius: f64,
        start_region: Shape,
        goal_region: Shape,
    ) -> Result<Self> {
        let world = Self {
            width,
            height,
            obstacles,
            robot_radius,
            start_region,
            goal_region,
        };
        world.validate()?;
        Ok(world)
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite() && self.height > 0.0 && self.height.is_finite()) {
            return Err(config_err(format!(
                "arena dimensions must be positive, got {} x {}",
                self.width, self.height
            )));
        }
        if !(self.robot_radius > 0.0 && self.robot_radius.is_finite()) {
            return Err(config_err(format!("robot_radius must be positive, got {}", self.robot_radius)));
        }
        for (i, shape) in self.obstacles.iter().enumerate() {
            if !shape.is_well_formed() {
                return Err(config_err(format!("obstacle {i} is malformed: {shape:?}")));
            }
            if !self.shape_in_bounds(shape) {
                return Err(config_err(format!("obstacle {i} lies outside the arena: {shape:?}")));
            }
        }
        for (name, region) in [("start_region", &self.start_region), ("goal_region", &self.goal_region)] {
            if !region.is_well_formed() || !self.shape_in_bounds(region) {
                return Err(config_err(format!("{name} is malformed or outside the arena: {region:?}")));
            }
            if let Some(i) = self
                .obstacles
                .iter()
                .position(|o| o.distance_to_shape(region) < self.robot_radius)
            {
                return Err(config_err(format!(
                    "{name} intersects obstacle {i} inflated by the robot radius"
                )));
            }
        }
        Ok(())
    }

    fn shape_in_bounds(&self, shape: &Shape) -> bool {
        let (x0, y0, x1, y1) = shape.bounds();
        let (hw, hh) = (0.5 * self.width, 0.5 * self.height);
        x0 >= -hw && x1 <= hw && y0 >= -hh && y1 <= hh
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn obstacles(&self) -> &[Shape] {
        &self.obstacles
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    pub fn start_region(&self) -> &Shape {
        &self.start_region
    }

    pub fn goal_region(&self) -> &Shape {
        &self.goal_region
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x.abs() <= 0.5 * self.width && p.y.abs() <= 0.5 * self.height
    }

    /// Same geometry with a different robot radius (re-validated).
    pub fn with_robot_radius(&self, robot_radius: f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.obstacles.clone(),
            robot_radius,
            self.start_region,
            self.goal_region,
        )
    }

    pub fn to_toml(&self) -> String {
        let file = WorldFile {
            version: WORLD_FORMAT.to_string(),
            width: self.width,
            height: self.height,
            robot_radius: self.robot_radius,
            start_region: self.start_region,
            goal_region: self.goal_region,
            obstacles: self.obstacles.clone(),
        };
        toml::to_string(&file).expect("world serialization is infallible")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: WorldFile = toml::from_str(text).map_err(|e| Error::Format(format!("world file: {e}")))?;
        if file.version != WORLD_FORMAT {
            return Err(Error::Format(format!(
                "unsupported world version {:?}, expected {WORLD_FORMAT:?}",
                file.version
            )));
        }
        Self::new(
            file.width,
            file.height,
            file.obstacles,
            file.robot_radius,
            file.start_region,
            file.goal_region,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }
}

/// Distance along the ray from `origin` at absolute heading `ray_angle` to
/// the first obstacle or wall, clamped to `max_range`.
pub fn raycast(origin: Point, ray_angle: f64, max_range: f64, world: &WorldSpec) -> f64 {
    let dir = (ray_angle.cos(), ray_angle.sin());
    let (hw, hh) = (0.5 * world.width, 0.5 * world.height);

    let wall_t = |o: f64, d: f64, half: f64| {
        if d > 0.0 {
            ((half - o) / d).max(0.0)
        } else if d < 0.0 {
            ((-half - o) / d).max(0.0)
        } else {
            f64::INFINITY
        }
    };
    let mut best = wall_t(origin.x, dir.0, hw).min(wall_t(origin.y, dir.1, hh));

    for shape in &world.obstacles {
        if let Some(t) = shape.ray_hit(origin, dir) {
            best = best.min(t);
        }
    }
    best.min(max_range)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaserConfig {
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for LaserConfig {
    fn default() -> Self {
        Self {
            n_rays: 180,
            max_range: 5.0,
        }
    }
}

impl LaserConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rays < crate::env::LASER_BINS || self.n_rays % crate::env::LASER_BINS != 0 {
            return Err(config_err(format!(
                "n_rays = {} cannot be split into {} equal bins",
                self.n_rays,
                crate::env::LASER_BINS
            )));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(config_err(format!("max_range must be positive, got {}", self.max_range)));
        }
        Ok(())
    }

    /// Ray angle relative to the robot heading.
    pub fn relative_angle(&self, i: usize) -> f64 {
        -0.5 * PI + i as f64 * PI / (self.n_rays - 1) as f64
    }
}

/// A 180 degree scan; `ranges[0]` looks to the robot's right.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserScan {
    pub ranges: Vec<f64>,
    pub fov: f64,
    pub max_range: f64,
}

impl LaserScan {
    pub fn relative_angle(&self, i: usize) -> f64 {
        -0.5 * self.fov + i as f64 * self.fov / (self.ranges.len() - 1) as f64
    }
}

pub fn scan(pose: &Pose, laser: &LaserConfig, world: &WorldSpec) -> Result<LaserScan> {
    laser.validate()?;
    let origin = pose.position();
    let ranges = (0..laser.n_rays)
        .map(|i| raycast(origin, pose.theta + laser.relative_angle(i), laser.max_range, world).max(MIN_RANGE))
        .collect();
    Ok(LaserScan {
        ranges,
        fov: PI,
        max_range: laser.max_range,
    })
}

/// Forward-Euler unicycle step.
pub fn step_kinematics(pose: &Pose, v: f64, omega: f64, dt: f64) -> Pose {
    debug_assert!(dt > 0.0);
    Pose::new(
        pose.x + v * pose.theta.cos() * dt,
        pose.y + v * pose.theta.sin() * dt,
        pose.theta + omega * dt,
    )
}

/// True when the robot disc overlaps an obstacle or leaves the arena.
pub fn collides(pose: &Pose, world: &WorldSpec) -> bool {
    disc_collides(pose.position(), world.robot_radius, world)
}

pub(crate) fn disc_collides(p: Point, radius: f64, world: &WorldSpec) -> bool {
    let (hw, hh) = (0.5 * world.width, 0.5 * world.height);
    if p.x - radius < -hw || p.x + radius > hw || p.y - radius < -hh || p.y + radius > hh {
        return true;
    }
    world.obstacles.iter().any(|o| o.distance(p) < radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn empty(width: f64, height: f64) -> WorldSpec {
        WorldSpec::new(
            width,
            height,
            vec![],
            0.2,
            Shape::circle(0.0, 0.0, 0.1),
            Shape::circle(1.0, 0.0, 0.1),
        )
        .unwrap()
    }

    fn with_obstacles(obstacles: Vec<Shape>) -> WorldSpec {
        WorldSpec::new(
            10.0,
            10.0,
            obstacles,
            0.2,
            Shape::circle(-4.0, -4.0, 0.1),
            Shape::circle(-4.0, 4.0, 0.1),
        )
        .unwrap()
    }

    #[test]
    fn normalize_keeps_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-0.5), -0.5);
    }

    #[test]
    fn raycast_examples() {
        let origin = Point::new(0.0, 0.0);
        assert_eq!(raycast(origin, 0.0, 20.0, &empty(10.0, 10.0)), 5.0);
        let w = with_obstacles(vec![Shape::rect(2.0, -1.0, 3.0, 1.0)]);
        assert_eq!(raycast(origin, 0.0, 20.0, &w), 2.0);
        let w = with_obstacles(vec![Shape::circle(4.0, 0.0, 1.0)]);
        assert_eq!(raycast(origin, 0.0, 20.0, &w), 3.0);
    }

    #[test]
    fn raycast_inside_obstacle_is_zero() {
        let w = with_obstacles(vec![Shape::circle(0.0, 0.0, 1.0), Shape::rect(2.0, -1.0, 3.0, 1.0)]);
        assert_eq!(raycast(Point::new(0.0, 0.0), 1.0, 5.0, &w), 0.0);
        assert_eq!(raycast(Point::new(2.5, 0.0), 1.0, 5.0, &w), 0.0);
    }

    #[test]
    fn scan_symmetric_in_centred_square() {
        let laser = LaserConfig::default();
        let s = scan(&Pose::new(0.0, 0.0, 0.3), &laser, &empty(6.0, 6.0)).unwrap();
        assert_eq!(s.ranges.len(), 180);
        // theta = 0.3 breaks symmetry; use the axis-aligned pose for the check
        let s = scan(&Pose::new(0.0, 0.0, 0.0), &laser, &empty(6.0, 6.0)).unwrap();
        let n = s.ranges.len();
        for i in 0..n {
            assert_abs_diff_eq!(s.ranges[i], s.ranges[n - 1 - i], epsilon = 1e-9);
        }
    }

    #[test]
    fn scan_left_obstacle_shortens_left_half() {
        let w = with_obstacles(vec![Shape::circle(0.0, 1.5, 0.5)]);
        let s = scan(&Pose::new(0.0, 0.0, 0.0), &LaserConfig::default(), &w).unwrap();
        let (right, left) = s.ranges.split_at(90);
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min(left) < min(right));
    }

    #[test]
    fn scan_clamps_to_max_range() {
        let laser = LaserConfig {
            n_rays: 180,
            max_range: 3.0,
        };
        let s = scan(&Pose::new(0.0, 0.0, 1.0), &laser, &empty(100.0, 100.0)).unwrap();
        assert!(s.ranges.iter().all(|&r| r == 3.0));
    }

    #[test]
    fn scan_rejects_bad_ray_counts() {
        let w = empty(10.0, 10.0);
        for n_rays in [0, 10, 14, 16, 181] {
            let laser = LaserConfig { n_rays, max_range: 5.0 };
            assert!(matches!(scan(&Pose::new(0.0, 0.0, 0.0), &laser, &w), Err(Error::Config(_))));
        }
        let laser = LaserConfig {
            n_rays: 15,
            max_range: 5.0,
        };
        assert!(scan(&Pose::new(0.0, 0.0, 0.0), &laser, &w).is_ok());
    }

    #[test]
    fn kinematics_examples() {
        let p = step_kinematics(&Pose::new(0.0, 0.0, 0.0), 1.0, 0.0, 0.1);
        assert_eq!((p.x, p.y, p.theta), (0.1, 0.0, 0.0));
        let p = step_kinematics(&Pose::new(0.0, 0.0, 0.0), 0.0, PI, 1.0);
        assert_eq!((p.x, p.y, p.theta), (0.0, 0.0, PI));
        let p = step_kinematics(&Pose::new(0.0, 0.0, PI / 2.0), 2.0, 0.0, 0.5);
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-15);
        assert_eq!(p.theta, PI / 2.0);
    }

    #[test]
    fn collision_examples() {
        assert!(!collides(&Pose::new(0.0, 0.0, 0.0), &empty(10.0, 10.0)));
        let w = with_obstacles(vec![Shape::circle(2.0, 0.0, 0.5)]);
        assert!(collides(&Pose::new(2.0 - (0.5 + 0.2 - 0.01), 0.0, 0.0), &w));
        assert!(!collides(&Pose::new(2.0 - (0.5 + 0.2 + 0.01), 0.0, 0.0), &w));
        // Leaving the arena counts as a collision.
        assert!(collides(&Pose::new(4.9, 0.0, 0.0), &w));
    }

    #[test]
    fn world_validation() {
        let region = Shape::circle(0.0, 0.0, 0.2);
        assert!(WorldSpec::new(0.0, 5.0, vec![], 0.2, region, region).is_err());
        assert!(WorldSpec::new(5.0, 5.0, vec![], 0.0, region, region).is_err());
        assert!(WorldSpec::new(5.0, 5.0, vec![Shape::rect(2.0, 0.0, 3.0, 1.0)], 0.2, region, region).is_err());
        // start region within robot_radius of an obstacle
        let err = WorldSpec::new(
            5.0,
            5.0,
            vec![Shape::rect(0.3, -0.5, 1.0, 0.5)],
            0.2,
            region,
            Shape::circle(-1.5, 0.0, 0.1),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn world_file_round_trip() {
        let w = with_obstacles(vec![Shape::rect(1.0, 1.0, 2.0, 3.0), Shape::circle(-1.0, 2.0, 0.7)]);
        let text = w.to_toml();
        assert!(text.contains("version = \"world/1\""));
        assert_eq!(WorldSpec::from_toml(&text).unwrap(), w);
        let bad = text.replace("world/1", "world/2");
        assert!(matches!(WorldSpec::from_toml(&bad), Err(Error::Format(_))));
        let unknown = format!("friction = 0.3\n{text}");
        assert!(WorldSpec::from_toml(&unknown).is_err());
    }

    fn arb_obstacle() -> impl Strategy<Value = Shape> {
        prop_oneof![
            (-4.0..3.0f64, -4.0..3.0f64, 0.1..1.0f64, 0.1..1.0f64)
                .prop_map(|(x, y, w, h)| Shape::rect(x, y, x + w, y + h)),
            (-3.5..3.5f64, -3.5..3.5f64, 0.1..1.0f64).prop_map(|(x, y, r)| Shape::circle(x, y, r)),
        ]
    }

    proptest! {
        #[test]
        fn kinematics_keeps_heading_normalized(
            x in -5.0..5.0f64, y in -5.0..5.0f64, th in -10.0..10.0f64,
            v in -1.0..1.0f64, w in -20.0..20.0f64, dt in 0.01..2.0f64,
        ) {
            let p = step_kinematics(&Pose::new(x, y, th), v, w, dt);
            prop_assert!(p.theta > -PI && p.theta <= PI);
        }

        #[test]
        fn collides_monotone_in_radius(
            obstacles in proptest::collection::vec(arb_obstacle(), 0..5),
            x in -4.0..4.0f64, y in -4.0..4.0f64, r in 0.05..0.5f64, extra in 0.0..0.5f64,
        ) {
            let base = WorldSpec::new(
                10.0, 10.0, obstacles, 0.01,
                Shape::circle(-4.9, -4.9, 0.0), Shape::circle(-4.9, -4.9, 0.0),
            );
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let p = Point::new(x, y);
            if disc_collides(p, r, &base) {
                prop_assert!(disc_collides(p, r + extra, &base));
            }
        }

        #[test]
        fn scan_is_deterministic(
            obstacles in proptest::collection::vec(arb_obstacle(), 0..6),
            th in -PI..PI,
        ) {
            let w = WorldSpec::new(
                10.0, 10.0, obstacles, 0.01,
                Shape::circle(-4.9, -4.9, 0.0), Shape::circle(-4.9, -4.9, 0.0),
            );
            prop_assume!(w.is_ok());
            let w = w.unwrap();
            let pose = Pose::new(4.5, 4.5, th);
            let a = scan(&pose, &LaserConfig::default(), &w).unwrap();
            let b = scan(&pose, &LaserConfig::default(), &w).unwrap();
            prop_assert!(a.ranges.iter().zip(&b.ranges).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}
