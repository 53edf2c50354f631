//! Artificial-potential-fields reactive controller.
//!
//! The goal pulls with a unit vector scaled by `k_att`; every laser ray
//! closer than `d_influence` pushes back along the reversed ray with the
//! usual inverse-distance repulsion. The resultant's bearing steers the
//! robot and its cosine sets the forward speed, so the robot slows down
//! through turns and stops to rotate when the resultant points backwards.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::world::LaserScan;

/// A `(v, omega)` velocity command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub v: f64,
    pub omega: f64,
}

impl Action {
    pub const ZERO: Action = Action { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    /// Clip both components to `[-1, 1]`, the executed action range.
    pub fn clipped(self) -> Self {
        Self::new(self.v.clamp(-1.0, 1.0), self.omega.clamp(-1.0, 1.0))
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.v, self.omega]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorParams {
    pub k_att: f64,
    pub k_rep: f64,
    /// Rays longer than this exert no repulsion (meters).
    pub d_influence: f64,
    pub k_omega: f64,
    pub v_max: f64,
}

impl Default for PriorParams {
    fn default() -> Self {
        Self {
            k_att: 1.0,
            k_rep: 0.1,
            d_influence: 0.8,
            k_omega: 2.0,
            v_max: 1.0,
        }
    }
}

impl PriorParams {
    pub fn validate(&self, max_range: f64) -> Result<()> {
        let gains = [self.k_att, self.k_rep, self.d_influence, self.k_omega, self.v_max];
        if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(config_err(format!("prior gains must be positive: {self:?}")));
        }
        if self.d_influence > max_range {
            return Err(config_err(format!(
                "d_influence {} exceeds the laser max_range {max_range}",
                self.d_influence
            )));
        }
        Ok(())
    }
}

/// Robot-frame resultant force `(F_x, F_y)`.
pub fn resultant_force(scan: &LaserScan, angle_to_goal: f64, params: &PriorParams) -> (f64, f64) {
    let mut fx = params.k_att * angle_to_goal.cos();
    let mut fy = params.k_att * angle_to_goal.sin();
    let inv_influence = 1.0 / params.d_influence;
    for (i, &d) in scan.ranges.iter().enumerate() {
        if d < params.d_influence {
            let magnitude = params.k_rep * (1.0 / d - inv_influence) / (d * d);
            let phi = scan.relative_angle(i);
            fx -= magnitude * phi.cos();
            fy -= magnitude * phi.sin();
        }
    }
    (fx, fy)
}

/// The prior's command: `v` in `[0, v_max] ∩ [0, 1]`, `omega` in `[-1, 1]`.
///
/// `dist_to_goal` is part of the controller's input contract but the
/// attractive term is a unit vector, so the command does not depend on it.
pub fn prior_command(scan: &LaserScan, angle_to_goal: f64, _dist_to_goal: f64, params: &PriorParams) -> Action {
    let (fx, fy) = resultant_force(scan, angle_to_goal, params);
    let bearing = fy.atan2(fx);
    let omega = (params.k_omega * bearing).clamp(-1.0, 1.0);
    let v = (params.v_max * bearing.cos().max(0.0)).clamp(0.0, 1.0);
    Action::new(v, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn open_scan(n: usize, max_range: f64) -> LaserScan {
        LaserScan {
            ranges: vec![max_range; n],
            fov: PI,
            max_range,
        }
    }

    #[test]
    fn goal_ahead_in_open_space_drives_straight() {
        let a = prior_command(&open_scan(180, 5.0), 0.0, 3.0, &PriorParams::default());
        assert_eq!(a, Action::new(1.0, 0.0));
    }

    #[test]
    fn symmetric_obstacles_cancel_laterally() {
        let mut scan = open_scan(180, 5.0);
        for i in 0..20 {
            scan.ranges[i] = 0.6;
            scan.ranges[179 - i] = 0.6;
        }
        let a = prior_command(&scan, 0.0, 3.0, &PriorParams::default());
        assert!(a.omega.abs() < 1e-12, "omega = {}", a.omega);
    }

    #[test]
    fn goal_behind_turns_in_place() {
        // Resultant = k_att * (cos pi, sin pi) points backwards: bearing = pi.
        let a = prior_command(&open_scan(180, 5.0), PI, 3.0, &PriorParams::default());
        assert_eq!(a.v, 0.0);
        assert_eq!(a.omega.abs(), 1.0);
    }

    #[test]
    fn obstacle_on_left_steers_right() {
        let mut scan = open_scan(180, 5.0);
        for r in &mut scan.ranges[100..130] {
            *r = 0.6;
        }
        let a = prior_command(&scan, 0.0, 3.0, &PriorParams::default());
        assert!(a.omega < 0.0);
        assert!(a.v < 1.0);
    }

    #[test]
    fn distant_obstacles_have_no_effect() {
        let params = PriorParams::default();
        let mut scan = open_scan(180, 5.0);
        let base = prior_command(&scan, 0.4, 3.0, &params);
        for r in &mut scan.ranges[40..90] {
            *r = params.d_influence + 0.3;
        }
        assert_eq!(prior_command(&scan, 0.4, 3.0, &params), base);
    }

    #[test]
    fn params_validation() {
        assert!(PriorParams::default().validate(5.0).is_ok());
        assert!(PriorParams::default().validate(0.5).is_err());
        let p = PriorParams {
            k_rep: 0.0,
            ..PriorParams::default()
        };
        assert!(p.validate(5.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn output_ranges_hold(
            ranges in proptest::collection::vec(1e-3..5.0f64, 180),
            angle in -PI..PI,
            k_omega in 0.1..10.0f64,
        ) {
            let scan = LaserScan { ranges, fov: PI, max_range: 5.0 };
            let params = PriorParams { k_omega, ..PriorParams::default() };
            let a = prior_command(&scan, angle, 1.0, &params);
            proptest::prop_assert!((0.0..=1.0).contains(&a.v));
            proptest::prop_assert!((-1.0..=1.0).contains(&a.omega));
            let b = prior_command(&scan, angle, 1.0, &params);
            proptest::prop_assert_eq!(a.v.to_bits(), b.v.to_bits());
            proptest::prop_assert_eq!(a.omega.to_bits(), b.omega.to_bits());
        }
    }
}
