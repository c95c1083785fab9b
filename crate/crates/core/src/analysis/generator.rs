//! Test functions, the generator `G` and Lyapunov drift checks.

use serde::Serialize;

use super::{exp_sum, Analysis};
use crate::calculus::{integrate_with, QuadOptions, QuadratureError};
use crate::error::{invalid, precondition, Error, Result};

type Fun<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;
type LnFun<'a> = Box<dyn Fn(f64) -> (f64, f64) + Send + Sync + 'a>;

/// A test function `u` with an optional exact derivative.
///
/// Without one, `u′` is a central difference with step
/// `h = max(1e-6, 1e-6·|x|)`. A log-derivative `(sign, ln|u′|)` lets the
/// generator evaluate `k·u′` far out without overflow.
pub struct FunctionHandle<'a> {
    value: Fun<'a>,
    derivative: Option<Fun<'a>>,
    ln_derivative: Option<LnFun<'a>>,
    weighted: Option<Fun<'a>>,
}

impl<'a> FunctionHandle<'a> {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self { value: Box::new(f), derivative: None, ln_derivative: None, weighted: None }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_derivative(|_| 0.0)
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        self.derivative = Some(Box::new(d));
        self
    }

    pub fn with_ln_derivative(mut self, d: impl Fn(f64) -> (f64, f64) + Send + Sync + 'a) -> Self {
        self.ln_derivative = Some(Box::new(d));
        self
    }

    /// Supply `k(y)·u′(y)` directly, for when the product simplifies and
    /// forming it from the factors would cancel catastrophically.
    pub fn with_weighted_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        self.weighted = Some(Box::new(d));
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn numeric_derivative(&self, x: f64) -> f64 {
        let h = (1e-6 * x.abs()).max(1e-6);
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(x),
            None => self.numeric_derivative(x),
        }
    }

    /// `k(y) u′(y)` computed in the log domain when possible.
    fn weighted_derivative(&self, ln_k: f64, y: f64) -> f64 {
        if let Some(w) = &self.weighted {
            return w(y);
        }
        match &self.ln_derivative {
            Some(ld) => {
                let (sign, l) = ld(y);
                if sign == 0.0 {
                    0.0
                } else {
                    sign * exp_sum(&[ln_k, l])
                }
            }
            None => {
                let d = self.derivative(y);
                if d == 0.0 {
                    0.0
                } else {
                    ln_k.exp() * d
                }
            }
        }
    }
}

/// `(Gu)(x) = −α(x)u′(x) + (β(x)/k(x)) ∫_x^∞ k(y)u′(y) dy`.
pub fn generator_apply(an: &Analysis, u: &FunctionHandle<'_>, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return invalid(format!("generator needs x > 0, got {x}"));
    }
    let m = an.model();
    let drift = -m.alpha.evaluate(x) * u.derivative(x);
    let ln_beta = m.beta.ln_evaluate(x);
    if ln_beta == f64::NEG_INFINITY {
        return Ok(drift);
    }
    let integrand = |y: f64| u.weighted_derivative(m.k.ln_evaluate(y), y);
    let opts = QuadOptions::relative(1e-11, 1e-300);
    let tail = match integrate_with(&integrand, x, f64::INFINITY, &opts) {
        Ok(r) => r.value,
        Err(QuadratureError::NoConvergence { best, .. }) => best.value,
        Err(e) => return Err(Error::Quadrature(e)),
    };
    if !tail.is_finite() {
        return precondition(format!("∫_x^∞ k u′ diverges at x = {x}"));
    }
    Ok(drift + exp_sum(&[ln_beta, -m.k.ln_evaluate(x)]) * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPoint {
    pub x: f64,
    pub drift: f64,
    /// `V(x)/c`, the resulting bound on the mean hitting time of `[0, x_*]`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    /// `GV ≤ −c` at every grid point `≥ x_*`.
    pub holds: bool,
    /// `GV ≤ 0` (up to rounding) at every grid point `≥ x_*`.
    pub non_explosion: bool,
    pub points: Vec<DriftPoint>,
}

pub fn lyapunov_drift_check(an: &Analysis, v: &FunctionHandle<'_>, c: f64, x_star: f64, grid: &[f64]) -> Result<LyapunovReport> {
    if !(c > 0.0) {
        return invalid(format!("drift constant c must be positive, got {c}"));
    }
    let mut points = Vec::new();
    let (mut holds, mut non_explosion) = (true, true);
    for &x in grid.iter().filter(|&&x| x >= x_star) {
        let vx = v.value(x);
        if !(vx > 0.0) {
            return invalid(format!("V must be positive on the grid, V({x}) = {vx}"));
        }
        let drift = generator_apply(an, v, x)?;
        let scale = (an.model().alpha.evaluate(x) * v.derivative(x)).abs().max(1.0);
        holds &= drift <= -c;
        non_explosion &= drift <= 1e-6 * scale;
        points.push(DriftPoint { x, drift, bound: vx / c });
    }
    Ok(LyapunovReport { holds, non_explosion, points })
}

impl Analysis {
    /// `s` with its exact derivative `s′`.
    pub fn scale_handle(&self) -> Result<FunctionHandle<'_>> {
        self.s_at_infinity()?;
        Ok(FunctionHandle::new(move |x| self.scale_s(x).unwrap_or(f64::NAN))
            .with_derivative(move |x| self.scale_density(x))
            .with_ln_derivative(move |x| (1.0, self.ln_scale_density(x)))
            .with_weighted_derivative(move |y| exp_sum(&[self.model.ln_gamma(y), -self.gam(y)])))
    }

    /// `φ_a` with its exact derivative `s′π̄ + 1/α`.
    pub fn phi_handle(&self, a: f64) -> Result<FunctionHandle<'_>> {
        if !(a > 0.0) {
            return invalid(format!("need a > 0, got {a}"));
        }
        self.require_pi_tail()?;
        let base = self.big_phi(a)?;
        Ok(FunctionHandle::new(move |x| self.big_phi(x).map(|v| v - base).unwrap_or(f64::NAN))
            .with_derivative(move |x| self.phi_density(x))
            .with_ln_derivative(move |x| (1.0, self.ln_phi_density(x)))
            .with_weighted_derivative(move |y| self.weighted_phi_density(y)))
    }

    /// `φ₀` with its exact derivative.
    pub fn phi0_handle(&self) -> Result<FunctionHandle<'_>> {
        let probe = self.mean_extinction_time(1.0)?;
        let base = self.big_phi(1.0)? - probe;
        Ok(FunctionHandle::new(move |x| self.big_phi(x).map(|v| v - base).unwrap_or(f64::NAN))
            .with_derivative(move |x| self.phi_density(x))
            .with_ln_derivative(move |x| (1.0, self.ln_phi_density(x)))
            .with_weighted_derivative(move |y| self.weighted_phi_density(y)))
    }
}
