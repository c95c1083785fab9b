//! Decay-surge ↔ growth-collapse duality under `x ↦ 1/x`.
//!
//! The dual of `(α, β, k)` is `α̃(x) = x²α(1/x)`, `β̃(x) = β(1/x)`,
//! `h̃(x) = k(1/x)`: the dual grows along `ẋ = α̃(x)` and collapses at rate
//! `β̃` to a level `Y < x` with `P(Y < y) = h̃(y)/h̃(x)`. The growth-collapse
//! side is simulated here by its own tables and inversions, so that the
//! pathwise comparison exercises two independent code paths.

mod gc;

use std::sync::Arc;

use serde::Serialize;

use crate::analysis::Analysis;
use crate::error::Result;
use crate::model::{GammaForm, ModelTriple, RateFunction, SurvivalFunction};
use crate::rng::RngStream;
use crate::sampler::{simulate_path, SimConfig, Termination, ZeroPolicy};

pub use gc::{GcAnalysis, GcJump, GcTermination, GcTrajectory};

/// Growth-collapse triple `(α̃, β̃, h̃)`; `h̃` is non-decreasing.
#[derive(Clone, Debug)]
pub struct GcTriple {
    pub alpha_tilde: RateFunction,
    pub beta_tilde: RateFunction,
    pub h_tilde: RateFunction,
    pub closed: GcClosedForms,
}

/// Closed forms of a dual whose rates are power laws.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GcClosedForms {
    /// `α̃(x) = coef · x^exponent` as `(coef, exponent)`.
    pub growth: Option<(f64, f64)>,
    /// `Γ̃` for `β̃/α̃ = g·x^{e−1}`.
    pub gamma: Option<GammaForm>,
}

/// `f ↦ x^p f(1/x)`, keeping an accurate logarithm.
fn conjugate(f: &RateFunction, p: i32, label: String) -> RateFunction {
    let (g, lg) = (f.clone(), f.clone());
    RateFunction::custom(
        label,
        Arc::new(move |x: f64| if p == 0 { g.evaluate(1.0 / x) } else { x.powi(p) * g.evaluate(1.0 / x) }),
        Some(Arc::new(move |x: f64| if p == 0 { lg.ln_evaluate(1.0 / x) } else { p as f64 * x.ln() + lg.ln_evaluate(1.0 / x) })),
    )
}

pub fn dual_triple(model: &ModelTriple) -> GcTriple {
    // α = c·x^p and β = b·x^q give α̃ = c·x^{2−p} and β̃ = b·x^{−q}.
    let alpha = model.alpha.as_power();
    let growth = alpha.map(|(c, p)| (c, 2.0 - p));
    let gamma = alpha.zip(model.beta.as_power()).map(|((c, p), (b, q))| GammaForm { g: b / c, e: p - q - 1.0 });
    GcTriple {
        closed: GcClosedForms { growth, gamma },
        alpha_tilde: conjugate(&model.alpha, 2, format!("x^2 * alpha(1/x) where alpha = {}", model.alpha.source())),
        beta_tilde: conjugate(&model.beta, 0, format!("beta(1/x) where beta = {}", model.beta.source())),
        h_tilde: conjugate(model.k.as_rate(), 0, format!("k(1/x) where k = {}", model.k.source())),
    }
}

impl GcTriple {
    /// The decay-surge triple this is the dual of.
    pub fn inverse_map(&self) -> ModelTriple {
        ModelTriple::new(
            conjugate(&self.alpha_tilde, 2, format!("x^2 * alpha~(1/x) where alpha~ = {}", self.alpha_tilde.source())),
            conjugate(&self.beta_tilde, 0, format!("beta~(1/x) where beta~ = {}", self.beta_tilde.source())),
            SurvivalFunction::new(conjugate(&self.h_tilde, 0, format!("h~(1/x) where h~ = {}", self.h_tilde.source()))),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    /// `sup |1/X_t − X̃_t|` over jump times (both sides of each jump),
    /// interior flow points and the end time.
    pub max_discrepancy: f64,
    /// Same, relative to `X̃_t`.
    pub max_relative_discrepancy: f64,
    pub jumps: usize,
    pub dual_jumps: usize,
    /// Largest `|Sₙ − S̃ₙ|`.
    pub max_jump_time_gap: f64,
    /// Equal jump counts and every gap within `1e-9·max(1, Sₙ)`.
    pub jump_times_agree: bool,
    /// The check stopped early because a path left `(0, ∞)`.
    pub truncated: bool,
    pub checked_until: f64,
}

/// Simulate `X` from `model` and `X̃` from its dual with the same uniforms
/// and compare `1/X` with `X̃` along the whole path.
pub fn pathwise_duality_check(model: &ModelTriple, x0: f64, config: &SimConfig, seed: u64) -> Result<DualityReport> {
    let an = Analysis::new(model.clone());
    let gc = GcAnalysis::new(dual_triple(model));
    pathwise_duality_check_with(&an, &gc, x0, config, seed)
}

/// As [`pathwise_duality_check`], reusing prebuilt analyses.
pub fn pathwise_duality_check_with(an: &Analysis, gc: &GcAnalysis, x0: f64, config: &SimConfig, seed: u64) -> Result<DualityReport> {
    let cfg = SimConfig { zero_policy: ZeroPolicy::Absorb, seed, ..*config };
    let ds = simulate_path(an, x0, &cfg, &mut RngStream::new(seed, 0))?;
    let dual = gc.simulate(1.0 / x0, &cfg, &mut RngStream::new(seed, 0))?;

    let n = ds.jump_count().min(dual.jump_count());
    let mut max_gap: f64 = 0.0;
    for i in 0..n {
        max_gap = max_gap.max((ds.jump_times[i] - dual.jump_times[i]).abs());
    }
    let jump_times_agree = ds.jump_count() == dual.jump_count()
        && (0..n).all(|i| (ds.jump_times[i] - dual.jump_times[i]).abs() <= 1e-9 * ds.jump_times[i].max(1.0));

    let truncated = ds.termination != Termination::HorizonReached || dual.termination != GcTermination::HorizonReached;
    let checked_until = ds.end_time.min(dual.end_time);
    let (mut abs, mut rel) = (0.0f64, 0.0f64);
    let mut compare = |x: f64, xt: f64| {
        let d = (1.0 / x - xt).abs();
        abs = abs.max(d);
        rel = rel.max(d / xt.abs());
    };
    // Flow segments: DS from `start`, GC from `start~`, for duration `dur`.
    let mut start = (ds.x0, dual.x0, 0.0);
    for i in 0..n {
        let (s, st, t0) = start;
        let dur = ds.jump_times[i] - t0;
        for f in [0.25, 0.5, 0.75] {
            compare(an.flow(s, f * dur)?, gc.flow(st, f * dur)?);
        }
        compare(ds.pre_jump[i], dual.pre_jump[i]);
        compare(ds.post_jump[i], dual.post_jump[i]);
        start = (ds.post_jump[i], dual.post_jump[i], ds.jump_times[i]);
    }
    if !truncated && ds.jump_count() == dual.jump_count() {
        let (s, st, t0) = start;
        let dur = checked_until - t0;
        for f in [0.25, 0.5, 0.75] {
            compare(an.flow(s, f * dur)?, gc.flow(st, f * dur)?);
        }
        compare(ds.final_value, dual.final_value);
    }
    Ok(DualityReport {
        max_discrepancy: abs,
        max_relative_discrepancy: rel,
        jumps: ds.jump_count(),
        dual_jumps: dual.jump_count(),
        max_jump_time_gap: max_gap,
        jump_times_agree,
        truncated,
        checked_until,
    })
}

#[cfg(test)]
mod tests;
