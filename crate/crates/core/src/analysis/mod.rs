//! Analytic objects of a decay-surge model: flow, `Γ`, scale functions,
//! speed density, boundary and regime classification, exit probabilities,
//! hitting-time moments and the generator.
//!
//! Every antiderivative is tabulated lazily on a geometric grid the first
//! time it is needed; closed forms registered on the model take precedence.

mod boundary;
mod generator;
mod hitting;

use std::sync::OnceLock;

use crate::calculus::{integrate, integrate_with, Anchor, Cumulative, QuadOptions, QuadratureError};
use crate::error::{invalid, precondition, Error, Result};
use crate::model::{ClosedForms, ModelTriple};

pub use boundary::{BoundaryClass, BoundaryVerdict, RegimeReport, RegimeVerdict};
pub use generator::{generator_apply, lyapunov_drift_check, DriftPoint, FunctionHandle, LyapunovReport};
pub use hitting::ExitProbability;

type Table = std::result::Result<Cumulative, QuadratureError>;

/// `exp(Σ terms)` with the conventions `e^{-∞ + …} = 0` and `e^{+∞ + …} = ∞`,
/// so that a vanishing factor wins over an overflowing one.
pub(crate) fn exp_sum(terms: &[f64]) -> f64 {
    if terms.iter().any(|t| t.is_nan()) {
        return f64::NAN;
    }
    if terms.iter().any(|&t| t == f64::NEG_INFINITY) {
        return 0.0;
    }
    if terms.iter().any(|&t| t == f64::INFINITY) {
        return f64::INFINITY;
    }
    terms.iter().sum::<f64>().exp()
}

/// `ln(e^a + e^b)`.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn table<'a>(cell: &'a OnceLock<Table>, build: impl FnOnce() -> Table) -> Result<&'a Cumulative> {
    cell.get_or_init(build).as_ref().map_err(|e| Error::Quadrature(e.clone()))
}

/// Analytic toolbox bound to one model. Cheap to construct; tables are
/// built on first use and shared read-only afterwards.
pub struct Analysis {
    model: ModelTriple,
    closed: ClosedForms,
    gamma: OnceLock<Table>,
    time: OnceLock<Table>,
    sprime: OnceLock<Table>,
    s1: OnceLock<Table>,
    pi_tail: OnceLock<Table>,
    head: OnceLock<Table>,
    phi: OnceLock<Table>,
    pi_flags: OnceLock<(bool, bool)>,
}

impl std::fmt::Debug for Analysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Analysis").field("model", &self.model).field("closed", &self.closed).finish()
    }
}

impl Analysis {
    pub fn new(model: ModelTriple) -> Self {
        let closed = *model.closed_forms();
        Self::with_closed(model, closed)
    }

    /// Ignore registered closed forms and go through quadrature everywhere.
    pub fn numeric(model: ModelTriple) -> Self {
        Self::with_closed(model, ClosedForms::default())
    }

    fn with_closed(model: ModelTriple, closed: ClosedForms) -> Self {
        Self {
            model,
            closed,
            gamma: OnceLock::new(),
            time: OnceLock::new(),
            sprime: OnceLock::new(),
            s1: OnceLock::new(),
            pi_tail: OnceLock::new(),
            head: OnceLock::new(),
            phi: OnceLock::new(),
            pi_flags: OnceLock::new(),
        }
    }

    pub fn model(&self) -> &ModelTriple {
        &self.model
    }

    pub fn closed_forms(&self) -> &ClosedForms {
        &self.closed
    }

    // ---- integrands -------------------------------------------------------

    fn gamma_density(&self, y: f64) -> f64 {
        self.model.gamma(y)
    }

    fn inv_alpha(&self, y: f64) -> f64 {
        1.0 / self.model.alpha.evaluate(y)
    }

    /// `Γ(y)` with failures mapped to NaN, for use inside integrands.
    fn gam(&self, y: f64) -> f64 {
        self.big_gamma(y).unwrap_or(f64::NAN)
    }

    /// `ln s′(y) = ln γ(y) − Γ(y) − ln k(y)`.
    pub fn ln_scale_density(&self, y: f64) -> f64 {
        let (lg, g, lk) = (self.model.ln_gamma(y), self.gam(y), self.model.k.ln_evaluate(y));
        if lg == f64::NEG_INFINITY {
            return lg;
        }
        lg - g - lk
    }

    /// `s′(y)`.
    pub fn scale_density(&self, y: f64) -> f64 {
        exp_sum(&[self.model.ln_gamma(y), -self.gam(y), -self.model.k.ln_evaluate(y)])
    }

    /// `ln π(y) = Γ(y) + ln k(y) − ln α(y)`.
    pub fn ln_speed_density(&self, y: f64) -> f64 {
        self.gam(y) + self.model.k.ln_evaluate(y) - self.model.alpha.ln_evaluate(y)
    }

    /// Speed density `π(y) = k(y) e^{Γ(y)} / α(y)` with normalization 1.
    pub fn speed_density(&self, y: f64) -> f64 {
        exp_sum(&[self.gam(y), self.model.k.ln_evaluate(y), -self.model.alpha.ln_evaluate(y)])
    }

    /// `γ(y) e^{Γ(y)} / k(y)`, the integrand of the embedded-chain head `G`.
    fn head_density(&self, y: f64) -> f64 {
        exp_sum(&[self.model.ln_gamma(y), self.gam(y), -self.model.k.ln_evaluate(y)])
    }

    /// `ln(s′(y) π̄(y))` where `π̄(y) = ∫_y^∞ π`.
    fn ln_w(&self, y: f64) -> f64 {
        let tail = self.pi_tail(y).unwrap_or(f64::NAN);
        self.ln_scale_density(y) + tail.ln()
    }

    /// `ln φ′(y) = ln(s′(y) π̄(y) + 1/α(y))`.
    pub(super) fn ln_phi_density(&self, y: f64) -> f64 {
        log_add_exp(self.ln_w(y), -self.model.alpha.ln_evaluate(y))
    }

    pub(super) fn phi_density(&self, y: f64) -> f64 {
        let lw = self.ln_w(y);
        let w = if lw == f64::NEG_INFINITY { 0.0 } else { lw.exp() };
        w + self.inv_alpha(y)
    }

    /// `k(y)φ′(y) = γ e^{−Γ} π̄ + k/α`, free of the `e^{Γ}/k · k` cancellation.
    pub(super) fn weighted_phi_density(&self, y: f64) -> f64 {
        let tail = self.pi_tail(y).unwrap_or(f64::NAN);
        exp_sum(&[self.model.ln_gamma(y), -self.gam(y), tail.ln()]) + exp_sum(&[self.model.k.ln_evaluate(y), -self.model.alpha.ln_evaluate(y)])
    }

    // ---- tables -----------------------------------------------------------

    fn gamma_table(&self) -> Result<&Cumulative> {
        table(&self.gamma, || Cumulative::build(&|y| self.gamma_density(y), Anchor::One))
    }

    fn time_table(&self) -> Result<&Cumulative> {
        table(&self.time, || Cumulative::build(&|y| self.inv_alpha(y), Anchor::One))
    }

    fn sprime_table(&self) -> Result<&Cumulative> {
        if self.closed.gamma.is_none() {
            self.gamma_table()?;
        }
        table(&self.sprime, || Cumulative::build(&|y| self.scale_density(y), Anchor::One))
    }

    fn s1_table(&self) -> Result<&Cumulative> {
        if !self.s_at_infinity()?.is_finite() {
            return precondition("s₁ is undefined: the scale function is unbounded, s(∞) = ∞");
        }
        table(&self.s1, || Cumulative::build(&|y| self.scale_density(y), Anchor::Infinity))
    }

    fn pi_tail_table(&self) -> Result<&Cumulative> {
        if !self.pi_integrability()?.1 {
            return precondition("the speed density is not integrable at ∞");
        }
        table(&self.pi_tail, || Cumulative::build(&|y| self.speed_density(y), Anchor::Infinity))
    }

    pub(crate) fn head_table(&self) -> Result<&Cumulative> {
        if self.closed.gamma.is_none() {
            self.gamma_table()?;
        }
        table(&self.head, || Cumulative::build(&|y| self.head_density(y), Anchor::Zero))
    }

    pub(super) fn phi_table(&self) -> Result<&Cumulative> {
        self.pi_tail_table()?;
        table(&self.phi, || Cumulative::build(&|y| self.phi_density(y), Anchor::One))
    }

    // ---- flow -------------------------------------------------------------

    /// `∫_z^x dy/α(y)` for `0 ≤ z ≤ x`, possibly `+∞`.
    pub fn time_between(&self, z: f64, x: f64) -> Result<f64> {
        if z == x {
            return Ok(0.0);
        }
        if let Some(f) = self.closed.flow {
            return Ok(f.time_between(z, x));
        }
        if z > 0.0 && z >= 0.5 * x && x.is_finite() {
            // Short spans are integrated directly to keep relative accuracy.
            return Ok(integrate(&|y| self.inv_alpha(y), z, x, 1e-13).or_else(|e| match e {
                QuadratureError::NoConvergence { best, .. } => Ok(best),
                e => Err(e),
            })?.value);
        }
        let t = self.time_table()?;
        let f = |y: f64| self.inv_alpha(y);
        let hi = t.value(&f, x)?;
        let lo = t.value(&f, z)?;
        Ok(if lo == f64::NEG_INFINITY || hi == f64::INFINITY { f64::INFINITY } else { hi - lo })
    }

    /// `t_a(x)`, the time for the flow started at `x` to reach `a ≤ x`.
    pub fn time_to_level(&self, x: f64, a: f64) -> Result<f64> {
        if !(a >= 0.0) || !(x >= 0.0) {
            return invalid(format!("levels must be nonnegative, got x = {x}, a = {a}"));
        }
        if a > x {
            return invalid(format!("target level a = {a} lies above the start x = {x}; the flow only decreases"));
        }
        self.time_between(a, x)
    }

    /// `t₀(x)`.
    pub fn t0(&self, x: f64) -> Result<f64> {
        self.time_between(0.0, x)
    }

    /// Whether the flow reaches 0 in finite time.
    pub fn t0_finite(&self) -> Result<bool> {
        if let Some(f) = self.closed.flow {
            return Ok(f.t_zero(1.0).is_finite());
        }
        Ok(self.time_table()?.at_zero().is_finite())
    }

    /// `x_t(x)`, clamped at 0 once the flow has reached it.
    pub fn flow(&self, x: f64, t: f64) -> Result<f64> {
        if !(x >= 0.0) || !(t >= 0.0) {
            return invalid(format!("flow needs x ≥ 0 and t ≥ 0, got x = {x}, t = {t}"));
        }
        if t == 0.0 || x == 0.0 {
            return Ok(x);
        }
        if let Some(f) = self.closed.flow {
            return Ok(f.flow(x, t));
        }
        let tab = self.time_table()?;
        let f = |y: f64| self.inv_alpha(y);
        let target = tab.value(&f, x)? - t;
        if target <= tab.at_zero() {
            return Ok(0.0);
        }
        Ok(tab.inverse(&f, target)?)
    }

    // ---- Γ ----------------------------------------------------------------

    /// `Γ(x) = ∫_1^x β/α`; `x = 0` and `x = ∞` give the limits.
    pub fn big_gamma(&self, x: f64) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(if x == f64::INFINITY { g.at_infinity() } else { g.value(x) });
        }
        Ok(self.gamma_table()?.value(&|y| self.gamma_density(y), x)?)
    }

    pub fn gamma_at_zero(&self) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(g.at_zero());
        }
        Ok(self.gamma_table()?.at_zero())
    }

    pub fn gamma_at_infinity(&self) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(g.at_infinity());
        }
        Ok(self.gamma_table()?.at_infinity())
    }

    /// `Γ⁻¹(v)`, saturating to `0` below `Γ(0)` and `∞` above `Γ(∞)`.
    pub fn big_gamma_inverse(&self, v: f64) -> Result<f64> {
        if let Some(g) = self.closed.gamma {
            return Ok(g.inverse(v));
        }
        Ok(self.gamma_table()?.inverse(&|y| self.gamma_density(y), v)?)
    }

    // ---- scale and speed --------------------------------------------------

    /// `s(x) = ∫_1^x s′`, with `s(1) = 0`.
    pub fn scale_s(&self, x: f64) -> Result<f64> {
        Ok(self.sprime_table()?.value(&|y| self.scale_density(y), x)?)
    }

    pub fn s_at_infinity(&self) -> Result<f64> {
        Ok(self.sprime_table()?.at_infinity())
    }

    pub fn s_at_zero(&self) -> Result<f64> {
        Ok(self.sprime_table()?.at_zero())
    }

    /// `s₁(x) = ∫_x^∞ s′`; requires `s(∞) < ∞`.
    pub fn scale_s1(&self, x: f64) -> Result<f64> {
        Ok(self.s1_table()?.value(&|y| self.scale_density(y), x)?)
    }

    /// `(∫_0^1 π < ∞, ∫_1^∞ π < ∞)`.
    pub fn pi_integrability(&self) -> Result<(bool, bool)> {
        if let Some(&flags) = self.pi_flags.get() {
            return Ok(flags);
        }
        if self.closed.gamma.is_none() {
            self.gamma_table()?;
        }
        let opts = QuadOptions::relative(1e-8, 1e-300);
        let pi = |y: f64| self.speed_density(y);
        let finite = |r: std::result::Result<crate::calculus::QuadratureResult, QuadratureError>| match r {
            Ok(r) => Ok(r.value.is_finite()),
            Err(QuadratureError::NoConvergence { best, .. }) => Ok(best.value.is_finite()),
            Err(e) => Err(Error::Quadrature(e)),
        };
        let flags = (finite(integrate_with(&pi, 0.0, 1.0, &opts))?, finite(integrate_with(&pi, 1.0, f64::INFINITY, &opts))?);
        Ok(*self.pi_flags.get_or_init(|| flags))
    }

    /// `π̄(y) = ∫_y^∞ π`; requires integrability at ∞.
    pub fn pi_tail(&self, y: f64) -> Result<f64> {
        Ok(self.pi_tail_table()?.value(&|z| self.speed_density(z), y)?)
    }

    /// `G(m) = ∫_0^m γ e^{Γ}/k`, the head integral of the embedded chain.
    pub(crate) fn head(&self, m: f64) -> Result<f64> {
        Ok(self.head_table()?.value(&|y| self.head_density(y), m)?)
    }

    /// `Φ(x) = ∫_1^x φ′`, so that `φ_a(x) = Φ(x) − Φ(a)`.
    pub(super) fn big_phi(&self, x: f64) -> Result<f64> {
        Ok(self.phi_table()?.value(&|y| self.phi_density(y), x)?)
    }
}

#[cfg(test)]
mod tests;
