//! Sampling policies: how long to wait after an acknowledgement before
//! generating the next update.
//!
//! Every policy here is a threshold rule `W = (γ - D)⁺`. Zero-wait is the
//! threshold `γ = 0`, the offline optimum is a fixed `γ*`, and the online
//! policy adapts `γ_k` with a clipped Robbins-Monro step after every frame.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::delay::MomentBounds;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::solver::gamma_bounds;

/// `(γ - D)⁺`.
pub fn threshold_decide(gamma: f64, delay: f64) -> f64 {
    (gamma - delay).max(0.0)
}

/// Robbins-Monro gain: `η_1 = 1/(2·d_lb)`, `η_k = 1/((k + 2)·d_lb)` for `k ≥ 2`.
pub fn step_size(k: u64, d_lb: f64) -> f64 {
    if k <= 1 {
        1.0 / (2.0 * d_lb)
    } else {
        1.0 / ((k as f64 + 2.0) * d_lb)
    }
}

/// What a policy did in one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub wait: f64,
    /// Threshold in force for this frame, if the policy has one.
    pub gamma: Option<f64>,
}

/// A causal sampling policy. `decide` sees only the delay of the packet
/// just delivered; anything older lives in the policy's own state.
pub trait Policy: Send {
    fn decide(&mut self, delay: f64) -> Decision;

    /// Whether the threshold changes over time.
    fn is_adaptive(&self) -> bool {
        false
    }

    fn name(&self) -> &'static str;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroWait;

impl Policy for ZeroWait {
    fn decide(&mut self, _delay: f64) -> Decision {
        Decision {
            wait: 0.0,
            gamma: None,
        }
    }

    fn name(&self) -> &'static str {
        "zero_wait"
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FixedThreshold {
    gamma: f64,
}

impl FixedThreshold {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fixed threshold must be non-negative, got {gamma}"
            )));
        }
        Ok(FixedThreshold { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Policy for FixedThreshold {
    fn decide(&mut self, delay: f64) -> Decision {
        Decision {
            wait: threshold_decide(self.gamma, delay),
            gamma: Some(self.gamma),
        }
    }

    fn name(&self) -> &'static str {
        "fixed_threshold"
    }
}

/// One Robbins-Monro frame: the decision, the frame statistics and the
/// threshold before and after the update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmStep {
    pub wait: f64,
    pub length: f64,
    pub reward: f64,
    pub gamma: f64,
    pub next_gamma: f64,
}

/// State of the online learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineRm {
    gamma: f64,
    /// Index of the next frame, starting at 1.
    k: u64,
    gamma_lb: f64,
    gamma_ub: f64,
    d_lb: f64,
    cost: f64,
    step_scale: f64,
}

impl OnlineRm {
    /// Builds the learner from the a-priori bounds, starting at the midpoint
    /// of `[γ_lb, γ_ub]` unless `gamma0` is given (it is clamped).
    pub fn new(bounds: &MomentBounds, cost: f64, gamma0: Option<f64>) -> Result<Self> {
        bounds.check()?;
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling cost must be non-negative, got {cost}"
            )));
        }
        let (gamma_lb, gamma_ub) = gamma_bounds(bounds, cost);
        let start = match gamma0 {
            Some(g) if g.is_finite() => g.clamp(gamma_lb, gamma_ub),
            Some(g) => {
                return Err(Error::InvalidParameter(format!(
                    "initial threshold must be finite, got {g}"
                )))
            }
            None => 0.5 * (gamma_lb + gamma_ub),
        };
        Ok(OnlineRm {
            gamma: start,
            k: 1,
            gamma_lb,
            gamma_ub,
            d_lb: bounds.d_lb,
            cost,
            step_scale: 1.0,
        })
    }

    /// Starts from a uniform draw on `[γ_lb, γ_ub]`.
    pub fn with_random_start(bounds: &MomentBounds, cost: f64, seed: u64) -> Result<Self> {
        let mut rm = Self::new(bounds, cost, None)?;
        rm.gamma = rng_from_seed(seed).random_range(rm.gamma_lb..=rm.gamma_ub);
        Ok(rm)
    }

    /// Multiplies every step size by `scale`. Only for negative-control
    /// experiments; the nominal schedule uses 1.
    pub fn with_step_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step scale must be non-negative, got {scale}"
            )));
        }
        self.step_scale = scale;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn frame(&self) -> u64 {
        self.k
    }

    pub fn clip_bounds(&self) -> (f64, f64) {
        (self.gamma_lb, self.gamma_ub)
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Waits `(γ_k - D_k)⁺`, then moves
    /// `γ_{k+1} = clip(γ_k + η_k (R_k - γ_k L_k), γ_lb, γ_ub)`
    /// with `L_k = D_k + W_k` and `R_k = ½L_k² + C`.
    pub fn rm_step(&mut self, delay: f64) -> RmStep {
        let gamma = self.gamma;
        let wait = threshold_decide(gamma, delay);
        let length = delay + wait;
        let reward = 0.5 * length * length + self.cost;
        let eta = self.step_scale * step_size(self.k, self.d_lb);
        let next_gamma =
            (gamma + eta * (reward - gamma * length)).clamp(self.gamma_lb, self.gamma_ub);
        self.gamma = next_gamma;
        self.k += 1;
        RmStep {
            wait,
            length,
            reward,
            gamma,
            next_gamma,
        }
    }
}

impl Policy for OnlineRm {
    fn decide(&mut self, delay: f64) -> Decision {
        let step = self.rm_step(delay);
        Decision {
            wait: step.wait,
            gamma: Some(step.gamma),
        }
    }

    fn is_adaptive(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "online_rm"
    }
}

/// Policy selection as written in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    ZeroWait,
    /// Without `gamma`, the offline optimum `γ*` is used.
    FixedThreshold {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    OnlineRm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init_seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step_scale: Option<f64>,
    },
}

/// Inputs a policy may need when it is instantiated.
#[derive(Clone, Copy, Debug)]
pub struct PolicyContext<'a> {
    pub bounds: &'a MomentBounds,
    pub cost: f64,
    pub gamma_star: Option<f64>,
}

impl PolicySpec {
    pub fn online() -> Self {
        PolicySpec::OnlineRm {
            gamma0: None,
            init_seed: None,
            step_scale: None,
        }
    }

    pub fn optimal() -> Self {
        PolicySpec::FixedThreshold { gamma: None }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::ZeroWait => "zero_wait",
            PolicySpec::FixedThreshold { .. } => "fixed_threshold",
            PolicySpec::OnlineRm { .. } => "online_rm",
        }
    }

    /// Builds a fresh policy instance.
    pub fn build(&self, ctx: &PolicyContext<'_>) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySpec::ZeroWait => Box::new(ZeroWait),
            PolicySpec::FixedThreshold { gamma } => {
                let g = gamma.or(ctx.gamma_star).ok_or_else(|| {
                    Error::Config(
                        "fixed_threshold without gamma needs the offline optimum, \
                         which is unavailable"
                            .into(),
                    )
                })?;
                Box::new(FixedThreshold::new(g)?)
            }
            PolicySpec::OnlineRm {
                gamma0,
                init_seed,
                step_scale,
            } => {
                let rm = match (gamma0, init_seed) {
                    (None, Some(seed)) => OnlineRm::with_random_start(ctx.bounds, ctx.cost, *seed)?,
                    _ => OnlineRm::new(ctx.bounds, ctx.cost, *gamma0)?,
                };
                Box::new(rm.with_step_scale(step_scale.unwrap_or(1.0))?)
            }
        })
    }
}
