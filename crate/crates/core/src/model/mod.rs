//! The model triple `(α, β, k)`: flow speed, jump rate and the survival
//! profile of the separable jump kernel.

mod closed;
pub mod expr;
pub mod family;
mod file;
pub mod function;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{integrate, Direction};

pub use closed::{ClosedForms, FlowForm, GammaForm};
pub use expr::{EvalError, Expr, ParseError};
pub use family::{make_family, FamilyFunction, FamilyName, ParamFamily};
pub use file::{FunctionSpec, ModelFile};
pub use function::{RateFunction, RealFn, Source, SurvivalFunction};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("in {slot}: {source}")]
    Parse { slot: &'static str, source: ParseError },
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error("family {family}: parameter {param}: {reason}")]
    InvalidParameter { family: &'static str, param: String, reason: String },
    #[error("model file: {0}")]
    File(String),
    #[error("cannot read model file {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug)]
pub struct ModelTriple {
    pub alpha: RateFunction,
    pub beta: RateFunction,
    pub k: SurvivalFunction,
    closed: ClosedForms,
}

impl ModelTriple {
    pub fn new(alpha: RateFunction, beta: RateFunction, k: SurvivalFunction) -> Self {
        let closed = ClosedForms::derive(&alpha, &beta, &k);
        Self { alpha, beta, k, closed }
    }

    pub fn from_exprs(alpha: &str, beta: &str, k: &str) -> Result<Self, ModelError> {
        let p = |slot: &'static str, t: &str| RateFunction::from_expr(t).map_err(|source| ModelError::Parse { slot, source });
        Ok(Self::new(p("alpha", alpha)?, p("beta", beta)?, SurvivalFunction::new(p("k", k)?)))
    }

    pub fn closed_forms(&self) -> &ClosedForms {
        &self.closed
    }

    /// Same functions with every registered closed form hidden.
    pub fn without_closed_forms(&self) -> Self {
        Self::new(self.alpha.opaque(), self.beta.opaque(), self.k.opaque())
    }

    /// `γ = β/α`.
    #[inline]
    pub fn gamma(&self, x: f64) -> f64 {
        self.beta.evaluate(x) / self.alpha.evaluate(x)
    }

    /// `ln γ`, robust to under/overflow of the individual factors.
    #[inline]
    pub fn ln_gamma(&self, x: f64) -> f64 {
        self.beta.ln_evaluate(x) - self.alpha.ln_evaluate(x)
    }

    pub fn describe(&self) -> ModelDescription {
        ModelDescription {
            alpha: self.alpha.source().clone(),
            beta: self.beta.source().clone(),
            k: self.k.source().clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelDescription {
    pub alpha: Source,
    pub beta: Source,
    pub k: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Alpha,
    Beta,
    K,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ViolationKind {
    NonPositive,
    NonFinite,
    /// `k` increases between this point and `next_x`.
    Increasing { next_x: f64, next_value: f64 },
    ClosedFormMismatch { quantity: &'static str, closed: f64, numeric: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub function: Slot,
    pub x: f64,
    pub value: f64,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

/// 256 log-spaced points in `[1e-6, 1e6]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 256)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// Probe positivity of `α`, `β`, positivity/monotonicity of `k`, and any
/// registered closed form against numerics.
pub fn validate_triple(model: &ModelTriple, grid: &[f64]) -> Vec<Violation> {
    let mut out = Vec::new();
    for &x in grid {
        for (slot, v) in [(Slot::Alpha, model.alpha.evaluate(x)), (Slot::Beta, model.beta.evaluate(x))] {
            if !v.is_finite() {
                out.push(Violation { function: slot, x, value: v, kind: ViolationKind::NonFinite });
            } else if v <= 0.0 {
                out.push(Violation { function: slot, x, value: v, kind: ViolationKind::NonPositive });
            }
        }
    }
    // k is probed through its logarithm so that underflow of e.g. e^{-x}
    // far out is not mistaken for a zero.
    for &x in grid {
        let lk = model.k.ln_evaluate(x);
        if lk.is_nan() || lk == f64::NEG_INFINITY {
            out.push(Violation { function: Slot::K, x, value: model.k.evaluate(x), kind: ViolationKind::NonPositive });
        } else if lk == f64::INFINITY {
            out.push(Violation { function: Slot::K, x, value: model.k.evaluate(x), kind: ViolationKind::NonFinite });
        }
    }
    let slack = if model.k.as_rate().has_closed_forms() { 0.0 } else { 1e-12 };
    for w in grid.windows(2) {
        let (l0, l1) = (model.k.ln_evaluate(w[0]), model.k.ln_evaluate(w[1]));
        let (k0, k1) = (model.k.evaluate(w[0]), model.k.evaluate(w[1]));
        if l1 > l0 + slack * l0.abs().max(1.0) {
            out.push(Violation {
                function: Slot::K,
                x: w[0],
                value: k0,
                kind: ViolationKind::Increasing { next_x: w[1], next_value: k1 },
            });
        }
    }
    out.extend(closed_form_mismatches(model, grid));
    out
}

fn close(a: f64, b: f64) -> bool {
    (a == b) || (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0)
}

fn closed_form_mismatches(model: &ModelTriple, grid: &[f64]) -> Vec<Violation> {
    let mut out = Vec::new();
    let cf = model.closed_forms();
    let stride = (grid.len() / 16).max(1);
    let probes: Vec<f64> = grid.iter().step_by(stride).copied().collect();
    if let Some(g) = cf.gamma {
        let gamma = |y: f64| model.gamma(y);
        for &x in &probes {
            let (a, b) = if x < 1.0 { (x, 1.0) } else { (1.0, x) };
            if let Ok(r) = integrate(&gamma, a, b, 1e-11) {
                let numeric = if x < 1.0 { -r.value } else { r.value };
                let closed = g.value(x);
                if !close(closed, numeric) {
                    out.push(Violation {
                        function: Slot::Beta,
                        x,
                        value: model.beta.evaluate(x),
                        kind: ViolationKind::ClosedFormMismatch { quantity: "Gamma", closed, numeric },
                    });
                }
            }
        }
    }
    if let Some(flow) = cf.flow {
        let inv_alpha = |y: f64| 1.0 / model.alpha.evaluate(y);
        for &x in &probes {
            let z = 0.5 * x;
            if let Ok(r) = integrate(&inv_alpha, z, x, 1e-11) {
                let closed = flow.time_between(z, x);
                if !close(closed, r.value) {
                    out.push(Violation {
                        function: Slot::Alpha,
                        x,
                        value: model.alpha.evaluate(x),
                        kind: ViolationKind::ClosedFormMismatch { quantity: "flow time", closed, numeric: r.value },
                    });
                }
            }
        }
    }
    if model.k.has_closed_inverse() {
        let k = model.k.clone();
        let f = std::sync::Arc::new(move |y: f64| k.evaluate(y));
        let inv = crate::calculus::monotone_inverse(f, 0.0, f64::INFINITY, Direction::Decreasing).with_tol(1e-15);
        for &x in &probes {
            let u = model.k.evaluate(x);
            if !(u > 0.0 && u.is_finite()) {
                continue;
            }
            let closed = model.k.closed_inverse(u).unwrap_or(f64::NAN);
            if let Ok(numeric) = inv.eval(u) {
                let (kc, kn) = (model.k.evaluate(closed), model.k.evaluate(numeric));
                if !close(kc, kn) {
                    out.push(Violation {
                        function: Slot::K,
                        x,
                        value: model.k.evaluate(x),
                        kind: ViolationKind::ClosedFormMismatch { quantity: "k inverse", closed, numeric },
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_is_clean() {
        let m = ModelTriple::from_exprs("x", "1", "exp(-x)").unwrap();
        assert!(validate_triple(&m, &[0.1, 1.0, 10.0]).is_empty());
        assert!(validate_triple(&m, &default_grid()).is_empty());
    }

    #[test]
    fn increasing_k_flags_every_pair() {
        let m = ModelTriple::from_exprs("x", "1", "exp(x)").unwrap();
        let grid = [0.1, 1.0, 10.0, 20.0];
        let v = validate_triple(&m, &grid);
        let inc: Vec<_> = v.iter().filter(|v| matches!(v.kind, ViolationKind::Increasing { .. })).collect();
        assert_eq!(inc.len(), grid.len() - 1);
    }

    #[test]
    fn negative_beta_flagged() {
        let m = ModelTriple::from_exprs("x", "x-5", "exp(-x)").unwrap();
        let v = validate_triple(&m, &[0.5, 1.0, 7.0]);
        assert!(v.iter().any(|v| v.function == Slot::Beta && v.x == 1.0 && v.kind == ViolationKind::NonPositive));
        assert!(!v.iter().any(|v| v.x == 7.0));
    }

    #[test]
    fn family_closed_forms_agree_with_numerics() {
        let fam = |n: &str, p: &[(&str, f64)]| ParamFamily::new(n, p).unwrap();
        let m = ModelTriple::new(
            fam("power", &[("coef", 2.0), ("exponent", 0.5)]).rate(),
            fam("power", &[("coef", 0.7), ("exponent", -1.2)]).rate(),
            fam("weibull-survival", &[("kappa", 0.5), ("eta", 1.3)]).survival(),
        );
        assert!(m.closed_forms().gamma.is_some() && m.closed_forms().flow.is_some());
        let v = validate_triple(&m, &log_grid(1e-3, 1e3, 64));
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn parse_error_names_slot() {
        let e = ModelTriple::from_exprs("x", "x+*2", "1").unwrap_err();
        assert!(e.to_string().contains("beta") && e.to_string().contains("offset 2"));
    }
}
