//! Direct simulation of a growth-collapse process.

use std::sync::OnceLock;

use serde::Serialize;

use super::{GcClosedForms, GcTriple};
use crate::calculus::{integrate, Anchor, Cumulative, QuadratureError};
use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::sampler::SimConfig;

type Table = std::result::Result<Cumulative, QuadratureError>;

fn table<'a>(cell: &'a OnceLock<Table>, build: impl FnOnce() -> Table) -> Result<&'a Cumulative> {
    cell.get_or_init(build).as_ref().map_err(|e| Error::Quadrature(e.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GcJump {
    /// Collapse after time `t` from the pre-jump level `level ≥ x`.
    Jump { t: f64, level: f64 },
    /// The flow reaches ∞ (at `t_inf`, possibly `∞`) before any collapse.
    Escapes { t_inf: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GcTermination {
    HorizonReached,
    ReachedInfinity,
    GuardTripped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcTrajectory {
    pub x0: f64,
    pub jump_times: Vec<f64>,
    pub pre_jump: Vec<f64>,
    pub post_jump: Vec<f64>,
    pub termination: GcTermination,
    pub end_time: f64,
    pub final_value: f64,
}

impl GcTrajectory {
    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }
}

/// Tables `Γ̃(x) = ∫_1^x β̃/α̃` and `T̃(x) = ∫_1^x 1/α̃` for a growth-collapse triple.
pub struct GcAnalysis {
    triple: GcTriple,
    closed: GcClosedForms,
    gamma: OnceLock<Table>,
    time: OnceLock<Table>,
}

impl GcAnalysis {
    /// Uses the triple's closed forms where it has them.
    pub fn new(triple: GcTriple) -> Self {
        let closed = triple.closed;
        Self { triple, closed, gamma: OnceLock::new(), time: OnceLock::new() }
    }

    /// Tables and inversions only.
    pub fn numeric(triple: GcTriple) -> Self {
        Self { triple, closed: GcClosedForms::default(), gamma: OnceLock::new(), time: OnceLock::new() }
    }

    pub fn triple(&self) -> &GcTriple {
        &self.triple
    }

    fn gamma_density(&self, y: f64) -> f64 {
        (self.triple.beta_tilde.ln_evaluate(y) - self.triple.alpha_tilde.ln_evaluate(y)).exp()
    }

    fn inv_alpha(&self, y: f64) -> f64 {
        (-self.triple.alpha_tilde.ln_evaluate(y)).exp()
    }

    fn gamma_table(&self) -> Result<&Cumulative> {
        table(&self.gamma, || Cumulative::build(&|y| self.gamma_density(y), Anchor::One))
    }

    fn time_table(&self) -> Result<&Cumulative> {
        table(&self.time, || Cumulative::build(&|y| self.inv_alpha(y), Anchor::One))
    }

    /// `Γ̃(x)`.
    pub fn big_gamma(&self, x: f64) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(g.value(x));
        }
        Ok(self.gamma_table()?.value(&|y| self.gamma_density(y), x)?)
    }

    pub fn gamma_at_infinity(&self) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(g.at_infinity());
        }
        Ok(self.gamma_table()?.at_infinity())
    }

    fn gamma_inverse(&self, v: f64) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(g.inverse(v));
        }
        Ok(self.gamma_table()?.inverse(&|y| self.gamma_density(y), v)?)
    }

    /// `∫_x^z dy/α̃(y)` for `x ≤ z`.
    pub fn time_between(&self, x: f64, z: f64) -> Result<f64> {
        if x == z {
            return Ok(0.0);
        }
        if let Some((c, r)) = self.closed.growth {
            if r == 1.0 {
                return Ok((z / x).ln() / c);
            }
            let q = 1.0 - r;
            return Ok((z.powf(q) - x.powf(q)) / (c * q));
        }
        if z.is_finite() && x > 0.0 && z <= 2.0 * x {
            return match integrate(&|y| self.inv_alpha(y), x, z, 1e-13) {
                Ok(r) => Ok(r.value),
                Err(QuadratureError::NoConvergence { best, .. }) => Ok(best.value),
                Err(e) => Err(Error::Quadrature(e)),
            };
        }
        let tab = self.time_table()?;
        let f = |y: f64| self.inv_alpha(y);
        let (a, b) = (tab.value(&f, x)?, tab.value(&f, z)?);
        Ok(if b == f64::INFINITY || a == f64::NEG_INFINITY { f64::INFINITY } else { b - a })
    }

    /// Growth flow `x̃_t(x)`; `∞` once the flow has escaped.
    pub fn flow(&self, x: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(x);
        }
        if let Some((c, r)) = self.closed.growth {
            if r == 1.0 {
                return Ok(x * (c * t).exp());
            }
            let q = 1.0 - r;
            let base = x.powf(q) + c * q * t;
            return Ok(if base <= 0.0 { f64::INFINITY } else { base.powf(1.0 / q) });
        }
        let tab = self.time_table()?;
        let f = |y: f64| self.inv_alpha(y);
        let target = tab.value(&f, x)? + t;
        if target >= tab.at_infinity() {
            return Ok(f64::INFINITY);
        }
        Ok(tab.inverse(&f, target)?)
    }

    /// Solve `Γ̃(x̃_t) = Γ̃(x) − ln u` for the pre-collapse level.
    pub fn jump_time_from_uniform(&self, x: f64, u: f64) -> Result<GcJump> {
        let target = self.big_gamma(x)? - u.ln();
        if target >= self.gamma_at_infinity()? {
            return Ok(GcJump::Escapes { t_inf: self.time_between(x, f64::INFINITY)? });
        }
        let level = self.gamma_inverse(target)?.max(x);
        Ok(GcJump::Jump { t: self.time_between(x, level)?, level })
    }

    /// `sup{y ≤ z : h̃(y) ≤ v·h̃(z)}` by bisection.
    pub fn jump_target_from_uniform(&self, z: f64, v: f64) -> Result<f64> {
        let h = &self.triple.h_tilde;
        let l = v.ln() + h.ln_evaluate(z);
        if !l.is_finite() {
            return invalid(format!("h~({z}) must be positive and finite"));
        }
        let g = |y: f64| h.ln_evaluate(y);
        if g(z) <= l {
            return Ok(z);
        }
        let mut hi = z;
        let mut lo = z / 2.0;
        while g(lo) > l {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-300 {
                return Ok(0.0);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) <= l {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Same draw order as the decay-surge sampler: `U` for the collapse
    /// time, then `V` for the collapse level.
    pub fn simulate(&self, x0: f64, config: &SimConfig, rng: &mut RngStream) -> Result<GcTrajectory> {
        config.validate()?;
        if !(x0 > 0.0) || !x0.is_finite() {
            return invalid(format!("growth-collapse start must be in (0, ∞), got {x0}"));
        }
        let mut tr = GcTrajectory {
            x0,
            jump_times: Vec::new(),
            pre_jump: Vec::new(),
            post_jump: Vec::new(),
            termination: GcTermination::HorizonReached,
            end_time: config.horizon,
            final_value: x0,
        };
        let (mut t, mut x) = (0.0, x0);
        loop {
            let u = rng.uniform();
            let (dt, level) = match self.jump_time_from_uniform(x, u)? {
                GcJump::Jump { t, level } => (t, level),
                GcJump::Escapes { t_inf } => (t_inf, f64::INFINITY),
            };
            if t + dt > config.horizon {
                tr.final_value = self.flow(x, config.horizon - t)?;
                return Ok(tr);
            }
            t += dt;
            if level == f64::INFINITY {
                tr.termination = GcTermination::ReachedInfinity;
                tr.end_time = t;
                tr.final_value = level;
                return Ok(tr);
            }
            let y = self.jump_target_from_uniform(level, rng.uniform())?;
            tr.jump_times.push(t);
            tr.pre_jump.push(level);
            tr.post_jump.push(y);
            x = y;
            if !(y >= 1.0 / config.explosion_level) || tr.jump_count() as u64 >= config.max_jumps {
                tr.termination = GcTermination::GuardTripped;
                tr.end_time = t;
                tr.final_value = y;
                return Ok(tr);
            }
        }
    }
}
