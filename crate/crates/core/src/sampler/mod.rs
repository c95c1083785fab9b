//! Exact event-driven simulation.
//!
//! Jump times come from inverting `P(T_x > t) = e^{−[Γ(x) − Γ(x_t(x))]}`,
//! jump targets from inverting the separable survival `k(y)/k(z)`. There is
//! no time discretization anywhere.

mod ensemble;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::error::{invalid, Result};
use crate::rng::RngStream;

pub use ensemble::{
    mc_exit_probability, mc_hitting_time, simulate_ensemble, EnsembleStats, ExitStats, HittingStats, PathOutcome,
};
pub use trajectory::{write_trajectories_csv, Termination, Trajectory};

/// Outcome of one jump-time draw from `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpTime {
    /// A jump after time `t`, from the pre-jump level `level = x_t(x)`.
    Jump { t: f64, level: f64 },
    /// The flow reaches 0 (at `t0`, possibly `∞`) before any jump.
    FlowHitsZero { t0: f64 },
}

/// Jump-time draw for a given uniform `u ∈ (0, 1)`.
///
/// Solves `Γ(x_t(x)) = Γ(x) + ln u` for the pre-jump level and converts it
/// to a time with `t_level(x)`.
pub fn jump_time_from_uniform(an: &Analysis, x: f64, u: f64) -> Result<JumpTime> {
    if !(x > 0.0) {
        return invalid(format!("jump time needs x > 0, got {x}"));
    }
    let target = an.big_gamma(x)? + u.ln();
    let g0 = an.gamma_at_zero()?;
    if target <= g0 {
        return Ok(JumpTime::FlowHitsZero { t0: an.t0(x)? });
    }
    let level = an.big_gamma_inverse(target)?.min(x);
    if level <= 0.0 {
        return Ok(JumpTime::FlowHitsZero { t0: an.t0(x)? });
    }
    Ok(JumpTime::Jump { t: an.time_between(level, x)?, level })
}

pub fn sample_jump_time(an: &Analysis, x: f64, rng: &mut RngStream) -> Result<JumpTime> {
    jump_time_from_uniform(an, x, rng.uniform())
}

/// Jump target `y = k⁻¹(v·k(z))` for a given uniform `v`; `P(Y > y) = k(y)/k(z)`.
pub fn jump_target_from_uniform(an: &Analysis, z: f64, v: f64) -> Result<f64> {
    let k = &an.model().k;
    let lkz = if z == 0.0 { k.at_zero().ln() } else { k.ln_evaluate(z) };
    if !lkz.is_finite() {
        return invalid(format!("k({z}) = {} is not finite and positive; no jump can start here", lkz.exp()));
    }
    Ok(k.ln_inverse_from(z, v.ln() + lkz))
}

pub fn sample_jump_target(an: &Analysis, z: f64, rng: &mut RngStream) -> Result<f64> {
    jump_target_from_uniform(an, z, rng.uniform())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Stop the path when it reaches 0.
    Absorb,
    /// Wait an `Exp(β(0))` time at 0, then jump with survival `k(y)/k(0)`.
    /// Falls back to absorption when `β(0) = 0` or `k(0) = ∞`.
    #[default]
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub max_jumps: u64,
    pub zero_policy: ZeroPolicy,
    pub seed: u64,
    /// States above this level trip the explosion guard.
    pub explosion_level: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { horizon: 100.0, max_jumps: 1_000_000, zero_policy: ZeroPolicy::Reflect, seed: 0, explosion_level: 1e300 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.max_jumps < 1 {
            return invalid("max_jumps must be at least 1");
        }
        Ok(())
    }
}

/// Optional stopping levels: first entrance into `[0, below]` or `[above, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopRule {
    pub below: Option<f64>,
    pub above: Option<f64>,
}

/// One path from `x0`, stopped at the horizon, absorption, the explosion
/// guard, or the first stop level reached.
pub fn simulate_path_until(an: &Analysis, x0: f64, config: &SimConfig, rng: &mut RngStream, stop: StopRule) -> Result<Trajectory> {
    config.validate()?;
    if !(x0 >= 0.0) || !x0.is_finite() {
        return invalid(format!("initial state must be finite and nonnegative, got {x0}"));
    }
    let m = an.model();
    let beta0 = m.beta.at_zero();
    let can_restart = config.zero_policy == ZeroPolicy::Reflect && beta0 > 0.0 && beta0.is_finite() && m.k.at_zero().is_finite();
    let mut tr = Trajectory::start(x0);
    let (mut t, mut x) = (0.0f64, x0);
    let finish = |mut tr: Trajectory, end: f64, value: f64, why: Termination| {
        tr.end_time = end;
        tr.final_value = value;
        tr.termination = why;
        tr
    };
    if stop.below.is_some_and(|a| x <= a) {
        return Ok(finish(tr, 0.0, x, Termination::HitLower));
    }
    if stop.above.is_some_and(|b| x >= b) {
        return Ok(finish(tr, 0.0, x, Termination::HitUpper));
    }
    loop {
        let (dt, pre) = if x == 0.0 {
            if !can_restart {
                return Ok(finish(tr, t, 0.0, Termination::AbsorbedAtZero));
            }
            (rng.exponential(beta0), 0.0)
        } else {
            let jt = sample_jump_time(an, x, rng)?;
            let (dt, pre) = match jt {
                JumpTime::Jump { t, level } => (t, level),
                JumpTime::FlowHitsZero { t0 } => (t0, 0.0),
            };
            if let Some(a) = stop.below {
                let ta = an.time_between(a.min(x), x)?;
                if ta <= dt && t + ta <= config.horizon {
                    return Ok(finish(tr, t + ta, a, Termination::HitLower));
                }
            }
            if t + dt > config.horizon {
                let xe = an.flow(x, config.horizon - t)?;
                return Ok(finish(tr, config.horizon, xe, Termination::HorizonReached));
            }
            if let JumpTime::FlowHitsZero { .. } = jt {
                t += dt;
                x = 0.0;
                tr.zero_visits.push(t);
                continue;
            }
            (dt, pre)
        };
        if t + dt > config.horizon {
            return Ok(finish(tr, config.horizon, x, Termination::HorizonReached));
        }
        t += dt;
        let y = sample_jump_target(an, pre, rng)?;
        tr.push_jump(t, pre, y);
        x = y;
        if stop.above.is_some_and(|b| y >= b) {
            return Ok(finish(tr, t, y, Termination::HitUpper));
        }
        if !(y <= config.explosion_level) || tr.jump_count() as u64 >= config.max_jumps {
            return Ok(finish(tr, t, y, Termination::ExplosionGuardTripped));
        }
    }
}

pub fn simulate_path(an: &Analysis, x0: f64, config: &SimConfig, rng: &mut RngStream) -> Result<Trajectory> {
    simulate_path_until(an, x0, config, rng, StopRule::default())
}
