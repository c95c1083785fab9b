//! Exit probabilities and mean hitting times.

use serde::Serialize;

use super::Analysis;
use crate::error::{invalid, precondition, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitProbability {
    /// `P(τ_{x,a} < τ_{x,b})`.
    pub value: f64,
    /// The ratio formula presumes the exit time from `(a, b)` is a.s. finite;
    /// this is not checked.
    pub assumes_finite_exit_time: bool,
}

impl Analysis {
    fn require_bounded_scale(&self) -> Result<()> {
        if self.gamma_at_infinity()?.is_finite() {
            return precondition("Γ(∞) < ∞: there is no nonconstant scale function");
        }
        if !self.s_at_infinity()?.is_finite() {
            return precondition("s(∞) = ∞: exit probabilities need a bounded scale function");
        }
        Ok(())
    }

    /// Probability that the process started at `x` enters `(0, a]` before
    /// `[b, ∞)`, by the ratio `(s₁(x) − s₁(b))/(s₁(a) − s₁(b))`.
    ///
    /// The ratio is exact only when the exit time is a.s. finite. A path that
    /// jumps over `b` and never comes back breaks this; see
    /// [`Analysis::exit_probability_with_overshoot`].
    pub fn exit_probability(&self, x: f64, a: f64, b: f64) -> Result<ExitProbability> {
        if !(a > 0.0) || !(a < b) {
            return invalid(format!("need 0 < a < b, got a = {a}, b = {b}"));
        }
        if !(a <= x && x <= b) {
            return invalid(format!("start x = {x} lies outside [a, b] = [{a}, {b}]"));
        }
        self.require_bounded_scale()?;
        let (sx, sa, sb) = (self.scale_s1(x)?, self.scale_s1(a)?, self.scale_s1(b)?);
        let value = ((sx - sb) / (sa - sb)).clamp(0.0, 1.0);
        Ok(ExitProbability { value, assumes_finite_exit_time: true })
    }

    /// Entrance into `(0, a]` before `[b, ∞)`, accounting for the overshoot
    /// of jumps across `b` instead of assuming the exit time is finite.
    ///
    /// A jump that crosses `b` lands at `Y` with `P(Y > y) = k(y)/k(b)`
    /// whatever the pre-jump level, so stopping `s₁(X)` on entrance gives
    /// `s₁(x) = p·s₁(a) + (1 − p)·c` with
    /// `c = E s₁(Y) = s₁(b) − (e^{−Γ(b)} − e^{−Γ(∞)})/k(b)`.
    pub fn exit_probability_with_overshoot(&self, x: f64, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0) || !(a < b) {
            return invalid(format!("need 0 < a < b, got a = {a}, b = {b}"));
        }
        if !(a <= x && x <= b) {
            return invalid(format!("start x = {x} lies outside [a, b] = [{a}, {b}]"));
        }
        self.require_bounded_scale()?;
        if x == b {
            return Ok(0.0);
        }
        let gb = self.big_gamma(b)?;
        let lk = self.model().k.ln_evaluate(b);
        let tail = (-gb - lk).exp() - (-self.gamma_at_infinity()? - lk).exp();
        let c = self.scale_s1(b)? - tail;
        let (sx, sa) = (self.scale_s1(x)?, self.scale_s1(a)?);
        Ok(((sx - c) / (sa - c)).clamp(0.0, 1.0))
    }

    /// `P(τ_{x,a} < ∞) = s₁(x)/s₁(a)`.
    pub fn prob_hit_below(&self, x: f64, a: f64) -> Result<f64> {
        if !(a > 0.0) || !(a <= x) {
            return invalid(format!("need 0 < a ≤ x, got a = {a}, x = {x}"));
        }
        self.require_bounded_scale()?;
        Ok(self.scale_s1(x)? / self.scale_s1(a)?)
    }

    pub(super) fn require_pi_tail(&self) -> Result<()> {
        if !self.pi_integrability()?.1 {
            return precondition("the speed density is not integrable at ∞, so the mean hitting time formula does not apply");
        }
        Ok(())
    }

    /// `φ_a(x)`: expected time to enter `(0, a]` from `x ≥ a > 0`.
    pub fn mean_hitting_time(&self, x: f64, a: f64) -> Result<f64> {
        if !(a > 0.0) || !(a <= x) {
            return invalid(format!("need 0 < a ≤ x, got a = {a}, x = {x}"));
        }
        if a == x {
            return Ok(0.0);
        }
        self.require_pi_tail()?;
        Ok(self.big_phi(x)? - self.big_phi(a)?)
    }

    /// `φ₀(x)`: expected time to extinction.
    pub fn mean_extinction_time(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return invalid(format!("need x > 0, got {x}"));
        }
        if !self.t0_finite()? {
            return precondition("t₀(x) = ∞: the flow never reaches 0");
        }
        if !self.gamma_at_zero()?.is_finite() {
            return precondition("Γ(0) = −∞: the process cannot reach 0 before jumping");
        }
        self.require_pi_tail()?;
        let tab = self.phi_table()?;
        Ok(self.big_phi(x)? - tab.at_zero())
    }
}
