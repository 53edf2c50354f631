//! Episode recording: run a controller in an environment and keep every step.

use crate::env::{Env, Terminal};
use crate::error::{usage_err, Result};
use crate::nn::NetRng;
use crate::policy::{Controller, Decision};
use crate::world::{Point, Pose};

/// Derive an independent seed from a base seed, a stream tag and an index
/// (splitmix64 finaliser over the mixed inputs).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One control step. `pose` is the pose the decision was taken from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub pose: Pose,
    pub decision: Decision,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: Pose,
    pub goal: Point,
    pub steps: Vec<StepRecord>,
    pub final_pose: Pose,
    pub terminal: Terminal,
    pub path_length: f64,
}

impl Trajectory {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn success(&self) -> bool {
        self.terminal == Terminal::Goal
    }

    /// Number of executed control steps.
    pub fn actuation_time(&self) -> usize {
        self.steps.len()
    }

    /// Poses visited, start and final pose included.
    pub fn poses(&self) -> impl Iterator<Item = Pose> + '_ {
        self.steps.iter().map(|s| s.pose).chain(std::iter::once(self.final_pose))
    }
}

/// Run the episode that `env` was last reset to until it terminates.
pub fn run_episode(env: &mut Env, controller: &Controller, rng: &mut NetRng) -> Result<Trajectory> {
    if env.mode() != controller.obs_mode() {
        return Err(usage_err(format!(
            "{} controller in a {} environment",
            controller.mode(),
            env.mode().as_str()
        )));
    }
    let start = env.pose().ok_or_else(|| usage_err("run_episode before reset"))?;
    let goal = env.goal().expect("goal set with pose");
    let mut steps = Vec::new();
    let mut pose = start;
    loop {
        let obs = env.observation().expect("active episode").clone();
        let decision = controller.act(&obs, rng)?;
        let result = env.step(decision.action)?;
        steps.push(StepRecord {
            t: steps.len(),
            pose,
            decision,
            reward: result.reward,
        });
        pose = result.info.pose;
        if let Some(terminal) = result.terminal {
            return Ok(Trajectory {
                start,
                goal,
                steps,
                final_pose: pose,
                terminal,
                path_length: env.path_length(),
            });
        }
    }
}
