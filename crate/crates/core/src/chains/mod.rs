//! The embedded jump chain `Zₙ` and its upper-record chain.
//!
//! With `m = min(x, y)` and `G(m) = ∫_0^m γ e^{Γ}/k`, the one-step survival is
//!
//! `S(x, y) = 1{y < x}(1 − e^{Γ(y) − Γ(x)}) + k(y) e^{−Γ(x)} G(m)`,
//!
//! valid when the flow never reaches 0 (`t₀ = ∞`) and `Γ(0) = −∞`.

mod records;

use serde::Serialize;

use crate::analysis::{exp_sum, Analysis};
use crate::calculus::{find_root, integrate, QuadratureError};
use crate::error::{invalid, precondition, Error, Result};
use crate::rng::RngStream;
use crate::sampler::{jump_time_from_uniform, JumpTime};

pub use records::{brute_force_records, extract_records, write_records_csv, RecordChain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddedSample {
    pub z_next: f64,
    pub direction: Direction,
    /// `Tₙ`, drawn from the marginal jump-time law from the previous state.
    pub inter_jump_time: Option<f64>,
    /// `Sₙ = Sₙ₋₁ + Tₙ`.
    pub jump_time: Option<f64>,
}

fn check_domain(an: &Analysis) -> Result<()> {
    if an.gamma_at_zero()?.is_finite() {
        return precondition("the embedded-chain law needs Γ(0) = −∞");
    }
    if an.t0_finite()? {
        return precondition("the embedded-chain law needs t₀(x) = ∞ (the flow must not reach 0)");
    }
    Ok(())
}

fn survival_unchecked(an: &Analysis, x: f64, y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Ok(1.0);
    }
    if y == f64::INFINITY {
        return Ok(0.0);
    }
    let gx = an.big_gamma(x)?;
    let m = x.min(y);
    let down = if y < x { -(an.big_gamma(y)? - gx).exp_m1() } else { 0.0 };
    let jump = exp_sum(&[an.model().k.ln_evaluate(y), -gx, an.head(m)?.ln()]);
    Ok((down + jump).clamp(0.0, 1.0))
}

/// `P(Zₙ > y | Zₙ₋₁ = x)`.
pub fn embedded_survival(an: &Analysis, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || y.is_nan() {
        return invalid(format!("need x > 0, got x = {x}, y = {y}"));
    }
    check_domain(an)?;
    survival_unchecked(an, x, y)
}

/// Probability that the next jump-chain move goes up from `x`.
pub fn up_probability(an: &Analysis, x: f64) -> Result<f64> {
    embedded_survival(an, x, x)
}

/// One step for given uniforms: `u` picks the level by inverting `S(x, ·)`
/// (which also decides the direction, since `S(x, x)` is the up-move
/// probability); `w`, if present, draws the inter-jump time.
pub fn embedded_step_from_uniforms(an: &Analysis, x: f64, u: f64, w: Option<f64>) -> Result<EmbeddedSample> {
    let p_up = survival_unchecked(an, x, x)?;
    let (z_next, direction) = if u < p_up {
        // Up: k(y) e^{−Γ(x)} G(x) = u.
        let l = u.ln() + an.big_gamma(x)? - an.head(x)?.ln();
        (an.model().k.ln_inverse_from(x, l).max(x), Direction::Up)
    } else {
        (invert_down(an, x, u)?, Direction::Down)
    };
    let inter_jump_time = match w {
        None => None,
        Some(w) => Some(match jump_time_from_uniform(an, x, w)? {
            JumpTime::Jump { t, .. } => t,
            JumpTime::FlowHitsZero { t0 } => t0,
        }),
    };
    Ok(EmbeddedSample { z_next, direction, inter_jump_time, jump_time: None })
}

/// Solve `S(x, y) = u` on `y ∈ (0, x)`, working in `ln y`.
fn invert_down(an: &Analysis, x: f64, u: f64) -> Result<f64> {
    let g = |t: f64| survival_unchecked(an, x, t.exp()).map(|s| s - u).unwrap_or(f64::NAN);
    let hi = x.ln();
    let mut lo = hi - 1.0;
    let mut step = 1.0;
    while g(lo) <= 0.0 {
        step *= 2.0;
        lo = hi - step;
        if step > 1e4 {
            return Ok(0.0);
        }
    }
    let t = find_root(&g, lo, hi, 1e-14 * hi.abs().max(1.0))?;
    Ok(t.exp().min(x))
}

pub fn sample_embedded_step(an: &Analysis, x: f64, rng: &mut RngStream, with_times: bool) -> Result<EmbeddedSample> {
    check_domain(an)?;
    let u = rng.uniform();
    let w = if with_times { Some(rng.uniform()) } else { None };
    embedded_step_from_uniforms(an, x, u, w)
}

pub fn simulate_embedded_chain(an: &Analysis, x0: f64, n_steps: usize, rng: &mut RngStream, with_times: bool) -> Result<Vec<EmbeddedSample>> {
    if !(x0 > 0.0) {
        return invalid(format!("need x0 > 0, got {x0}"));
    }
    check_domain(an)?;
    let mut out = Vec::with_capacity(n_steps);
    let (mut x, mut s) = (x0, 0.0);
    for _ in 0..n_steps {
        let mut step = sample_embedded_step(an, x, rng, with_times)?;
        if let Some(t) = step.inter_jump_time {
            s += t;
            step.jump_time = Some(s);
        }
        x = step.z_next;
        out.push(step);
    }
    Ok(out)
}

/// Density of `P(x, dy)`, by a five-point central difference of `S(x, ·)`
/// with a step proportional to `y`. The stencil stays on one side of `x`,
/// where `S(x, ·)` has a kink in its second derivative.
fn transition_density(an: &Analysis, x: f64, y: f64) -> Result<f64> {
    let mut h = 1e-3 * y;
    if y < x && y + 2.0 * h > x {
        h = ((x - y) / 2.5).max(1e-9 * y);
    } else if y > x && y - 2.0 * h < x {
        h = ((y - x) / 2.5).max(1e-9 * y);
    }
    let s = |v: f64| survival_unchecked(an, x, v);
    let d = (-s(y + 2.0 * h)? + 8.0 * s(y + h)? - 8.0 * s(y - h)? + s(y - 2.0 * h)?) / (12.0 * h);
    Ok((-d).max(0.0))
}

fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    match integrate(f, a, b, tol) {
        Ok(r) => Ok(r.value),
        Err(QuadratureError::NoConvergence { best, .. }) => Ok(best.value),
        Err(e) => Err(Error::Quadrature(e)),
    }
}

/// `P̄*(k, x, y)`: the next record arrives after exactly `k` steps and
/// exceeds `y > x`, given the current record value `x`.
pub fn record_transition(an: &Analysis, k: usize, x: f64, y: f64) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return invalid(format!("record_transition supports k ∈ {{1, 2, 3}}, got {k}"));
    }
    if !(x > 0.0) || !(y >= x) {
        return invalid(format!("need 0 < x ≤ y, got x = {x}, y = {y}"));
    }
    check_domain(an)?;
    // Mass after j non-record steps, integrated against the final exceedance.
    fn nested(an: &Analysis, j: usize, from: f64, x: f64, y: f64) -> Result<f64> {
        if j == 0 {
            return survival_unchecked(an, from, y);
        }
        let tol = if j == 1 { 1e-9 } else { 1e-7 };
        let err = std::cell::Cell::new(None);
        let f = |x1: f64| match transition_density(an, from, x1).and_then(|d| if d == 0.0 { Ok(0.0) } else { nested(an, j - 1, x1, x, y).map(|v| d * v) }) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e.to_string()));
                f64::NAN
            }
        };
        // Non-record steps land in (0, x]; split at `from` where the density kinks.
        let v = if from < x { quad(&f, 0.0, from, tol).and_then(|a| Ok(a + quad(&f, from, x, tol)?)) } else { quad(&f, 0.0, x, tol) };
        if let Some(e) = err.take() {
            return Err(Error::Precondition(format!("record transition integrand failed: {e}")));
        }
        v
    }
    nested(an, k - 1, x, x, y)
}

#[cfg(test)]
mod tests;
