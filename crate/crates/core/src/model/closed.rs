//! Analytic closed forms registered for power-law and affine families.

use super::function::{RateFunction, SurvivalFunction};

/// Flow `ẋ = −α(x)` with `α` a power law or an affine map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowForm {
    /// `α(x) = coef · x^exponent`
    Power { coef: f64, exponent: f64 },
    /// `α(x) = intercept + slope · x`, both positive.
    Affine { intercept: f64, slope: f64 },
}

impl FlowForm {
    /// `x_t(x)`, clamped at 0 once the flow has reached it.
    pub fn flow(&self, x: f64, t: f64) -> f64 {
        if t == 0.0 || x == 0.0 {
            return x;
        }
        match *self {
            FlowForm::Power { coef, exponent } => {
                if exponent == 1.0 {
                    return x * (-coef * t).exp();
                }
                let q = 1.0 - exponent;
                let base = x.powf(q) - coef * q * t;
                if base <= 0.0 {
                    if q > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    base.powf(1.0 / q)
                }
            }
            FlowForm::Affine { intercept, slope } => {
                let c = intercept / slope;
                ((x + c) * (-slope * t).exp() - c).max(0.0)
            }
        }
    }

    /// `∫_z^x dy/α(y)` for `0 ≤ z ≤ x`.
    pub fn time_between(&self, z: f64, x: f64) -> f64 {
        if z == x {
            return 0.0;
        }
        match *self {
            FlowForm::Power { coef, exponent } => {
                if exponent == 1.0 {
                    (x / z).ln() / coef
                } else {
                    let q = 1.0 - exponent;
                    if z == 0.0 && q < 0.0 {
                        return f64::INFINITY;
                    }
                    (x.powf(q) - z.powf(q)) / (coef * q)
                }
            }
            FlowForm::Affine { intercept, slope } => (slope * (x - z) / (intercept + slope * z)).ln_1p() / slope,
        }
    }

    /// `t₀(x) = ∫_0^x dy/α(y)`.
    pub fn t_zero(&self, x: f64) -> f64 {
        self.time_between(0.0, x)
    }
}

/// `Γ(x) = ∫_1^x γ` for `γ(x) = g · x^{e−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaForm {
    pub g: f64,
    pub e: f64,
}

impl GammaForm {
    pub fn value(&self, x: f64) -> f64 {
        if self.e == 0.0 {
            self.g * x.ln()
        } else {
            self.g * (self.e * x.ln()).exp_m1() / self.e
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        if self.e == 0.0 {
            return (v / self.g).exp();
        }
        let arg = self.e * v / self.g;
        if arg <= -1.0 {
            return if self.e > 0.0 { 0.0 } else { f64::INFINITY };
        }
        (arg.ln_1p() / self.e).exp()
    }

    pub fn at_zero(&self) -> f64 {
        if self.e > 0.0 {
            -self.g / self.e
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn at_infinity(&self) -> f64 {
        if self.e < 0.0 {
            -self.g / self.e
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClosedForms {
    pub flow: Option<FlowForm>,
    pub gamma: Option<GammaForm>,
    /// Whether `k` carries an analytic generalized inverse.
    pub k_inverse: bool,
}

impl ClosedForms {
    pub(crate) fn derive(alpha: &RateFunction, beta: &RateFunction, k: &SurvivalFunction) -> Self {
        let flow = match (alpha.as_power(), alpha.as_affine()) {
            (Some((coef, exponent)), _) => Some(FlowForm::Power { coef, exponent }),
            (None, Some((intercept, slope))) if intercept > 0.0 && slope > 0.0 => Some(FlowForm::Affine { intercept, slope }),
            _ => None,
        };
        let gamma = match (alpha.as_power(), beta.as_power()) {
            (Some((a1, a)), Some((b1, b))) => Some(GammaForm { g: b1 / a1, e: b - a + 1.0 }),
            _ => None,
        };
        Self { flow, gamma, k_inverse: k.has_closed_inverse() }
    }
}
