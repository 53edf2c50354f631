//! Deployment-time controllers.
//!
//! Five modes share one interface: the potential-fields prior alone, an
//! end-to-end actor, the residual hybrid (RRN), the residual hybrid with
//! uncertainty-gated fallback to the prior (sRRN), and a uniform random
//! baseline.
//!
//! sRRN estimates the residual's mean and variance from MC-dropout passes
//! of the actor, sets `epsilon = max(var_dv, var_domega)` and, with
//! probability `epsilon`, executes the prior's command unchanged. Otherwise
//! it executes `clip(prior + mean)`. Decisions are independent per step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{ObsMode, Observation};
use crate::error::{config_err, usage_err, Error, Result};
use crate::nn::{mc_statistics, DropoutMode, Mlp, NetRng};
use crate::prior::Action;

pub const DEFAULT_MC_PASSES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    PriorOnly,
    EndToEnd,
    Rrn,
    Srrn,
    Random,
}

impl PolicyMode {
    pub const ALL: [PolicyMode; 5] = [
        PolicyMode::PriorOnly,
        PolicyMode::EndToEnd,
        PolicyMode::Srrn,
        PolicyMode::Rrn,
        PolicyMode::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyMode::PriorOnly => "prior_only",
            PolicyMode::EndToEnd => "end_to_end",
            PolicyMode::Rrn => "rrn",
            PolicyMode::Srrn => "srrn",
            PolicyMode::Random => "random",
        }
    }

    /// Observation layout the mode's actor consumes, if it has one.
    pub fn obs_mode(self) -> Option<ObsMode> {
        match self {
            PolicyMode::Rrn | PolicyMode::Srrn => Some(ObsMode::Residual),
            PolicyMode::EndToEnd => Some(ObsMode::EndToEnd),
            PolicyMode::PriorOnly | PolicyMode::Random => None,
        }
    }

    pub fn needs_actor(self) -> bool {
        self.obs_mode().is_some()
    }
}

impl std::fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PolicyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| usage_err(format!("unknown policy mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchConfig {
    /// MC-dropout passes per decision.
    pub n_passes: usize,
    /// RRN uses one dropout-free forward instead of the MC mean.
    pub rrn_single_pass: bool,
    /// Replace the estimated switch probability (testing and ablations).
    pub epsilon_override: Option<f64>,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            n_passes: DEFAULT_MC_PASSES,
            rrn_single_pass: false,
            epsilon_override: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEstimate {
    pub mean: [f64; 2],
    pub variance: [f64; 2],
    pub epsilon: f64,
    pub n_passes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchDecision {
    pub used_prior_only: bool,
    pub uniform_draw: f64,
    pub epsilon: f64,
}

/// One controller step, decomposed so that
/// `action == clip(prior + applied_residual)` for the prior-based modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub prior: Action,
    pub applied_residual: [f64; 2],
    pub estimate: Option<ResidualEstimate>,
    pub switch: Option<SwitchDecision>,
}

/// Clipped sum of the prior command and a residual.
pub fn compose_hybrid(prior: Action, residual: [f64; 2]) -> Action {
    Action::new(prior.v + residual[0], prior.omega + residual[1]).clipped()
}

fn check_input(state: &Observation, actor: &Mlp) -> Result<Vec<f64>> {
    let x = state.to_vec();
    if x.len() != actor.input_dim() || actor.output_dim() != 2 {
        return Err(usage_err(format!(
            "actor maps {} -> {} but the {} observation has {} entries",
            actor.input_dim(),
            actor.output_dim(),
            state.mode.as_str(),
            x.len()
        )));
    }
    Ok(x)
}

pub fn residual_estimate(state: &Observation, actor: &Mlp, n_passes: usize, rng: &mut NetRng) -> Result<ResidualEstimate> {
    let x = check_input(state, actor)?;
    let (mean, variance) = mc_statistics(actor, &x, n_passes, rng)?;
    let variance = [variance[0], variance[1]];
    Ok(ResidualEstimate {
        mean: [mean[0], mean[1]],
        variance,
        epsilon: variance[0].max(variance[1]).clamp(0.0, 1.0),
        n_passes,
    })
}

/// Bernoulli switch: fall back to the prior when `u < epsilon`.
pub fn switch_decision(epsilon: f64, rng: &mut NetRng) -> SwitchDecision {
    let u = rng.random::<f64>();
    SwitchDecision {
        used_prior_only: u < epsilon,
        uniform_draw: u,
        epsilon,
    }
}

pub fn act_srrn(
    state: &Observation,
    actor: &Mlp,
    prior_action: Action,
    n_passes: usize,
    rng: &mut NetRng,
) -> Result<(Action, ResidualEstimate, SwitchDecision)> {
    let estimate = residual_estimate(state, actor, n_passes, rng)?;
    let decision = switch_decision(estimate.epsilon, rng);
    let action = if decision.used_prior_only {
        prior_action
    } else {
        compose_hybrid(prior_action, estimate.mean)
    };
    Ok((action, estimate, decision))
}

/// Hybrid action from the MC-dropout mean residual.
pub fn act_rrn(state: &Observation, actor: &Mlp, prior_action: Action, n_passes: usize, rng: &mut NetRng) -> Result<Action> {
    let estimate = residual_estimate(state, actor, n_passes, rng)?;
    Ok(compose_hybrid(prior_action, estimate.mean))
}

pub fn act_prior(state: &Observation) -> Action {
    state.prior_action
}

pub fn act_e2e(state: &Observation, actor: &Mlp) -> Result<Action> {
    let x = check_input(state, actor)?;
    let out = actor.forward(&x, DropoutMode::Off)?;
    Ok(Action::new(out[0], out[1]).clipped())
}

pub fn act_random<R: Rng + ?Sized>(rng: &mut R) -> Action {
    Action::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// A frozen controller for one [`PolicyMode`].
#[derive(Debug, Clone)]
pub struct Controller {
    mode: PolicyMode,
    actor: Option<Mlp>,
    config: SwitchConfig,
}

impl Controller {
    pub fn new(mode: PolicyMode, actor: Option<Mlp>, config: SwitchConfig) -> Result<Self> {
        if let Some(eps) = config.epsilon_override {
            if !(0.0..=1.0).contains(&eps) {
                return Err(config_err(format!("epsilon_override {eps} outside [0, 1]")));
            }
        }
        let actor = match mode.obs_mode() {
            Some(obs) => {
                let actor = actor.ok_or_else(|| usage_err(format!("mode {mode} requires an actor checkpoint")))?;
                if actor.input_dim() != obs.dim() || actor.output_dim() != 2 {
                    return Err(usage_err(format!(
                        "mode {mode} expects a {}-input actor, checkpoint has {} inputs",
                        obs.dim(),
                        actor.input_dim()
                    )));
                }
                if mode == PolicyMode::Srrn && actor.dropout_p() == 0.0 && config.epsilon_override.is_none() {
                    log::warn!("sRRN with dropout_p = 0: epsilon is always 0 and the controller behaves like RRN");
                }
                Some(actor)
            }
            None => None,
        };
        Ok(Self { mode, actor, config })
    }

    pub fn mode(&self) -> PolicyMode {
        self.mode
    }

    pub fn actor(&self) -> Option<&Mlp> {
        self.actor.as_ref()
    }

    pub fn obs_mode(&self) -> ObsMode {
        self.mode.obs_mode().unwrap_or(ObsMode::Residual)
    }

    pub fn act(&self, state: &Observation, rng: &mut NetRng) -> Result<Decision> {
        let prior = state.prior_action;
        let no_residual = Decision {
            action: prior,
            prior,
            applied_residual: [0.0, 0.0],
            estimate: None,
            switch: None,
        };
        let actor = || self.actor.as_ref().expect("checked in Controller::new");
        Ok(match self.mode {
            PolicyMode::PriorOnly => no_residual,
            PolicyMode::Random => {
                let action = act_random(rng);
                Decision { action, ..no_residual }
            }
            PolicyMode::EndToEnd => Decision {
                action: act_e2e(state, actor())?,
                ..no_residual
            },
            PolicyMode::Rrn => {
                let mean = if self.config.rrn_single_pass {
                    let out = actor().forward(&check_input(state, actor())?, DropoutMode::Off)?;
                    [out[0], out[1]]
                } else {
                    residual_estimate(state, actor(), self.config.n_passes, rng)?.mean
                };
                Decision {
                    action: compose_hybrid(prior, mean),
                    applied_residual: mean,
                    ..no_residual
                }
            }
            PolicyMode::Srrn => {
                let mut estimate = residual_estimate(state, actor(), self.config.n_passes, rng)?;
                if let Some(eps) = self.config.epsilon_override {
                    estimate.epsilon = eps;
                }
                let switch = switch_decision(estimate.epsilon, rng);
                let (action, applied_residual) = if switch.used_prior_only {
                    (prior, [0.0, 0.0])
                } else {
                    (compose_hybrid(prior, estimate.mean), estimate.mean)
                };
                Decision {
                    action,
                    prior,
                    applied_residual,
                    estimate: Some(estimate),
                    switch: Some(switch),
                }
            }
        })
    }
}
