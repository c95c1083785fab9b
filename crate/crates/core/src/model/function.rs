//! Rate and survival functions backed by expressions, parametric families or
//! composed closures.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::expr::{EvalError, Expr};
use super::family::ParamFamily;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Where a function came from; echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Expr(String),
    Family(ParamFamily),
    Composed(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Expr(s) => write!(f, "{s}"),
            Source::Family(p) => write!(f, "{p}"),
            Source::Composed(s) => write!(f, "{s}"),
        }
    }
}

/// Evaluation strategy. Families keep their parameters so that analytic
/// closed forms can be registered for them.
#[derive(Clone)]
pub(crate) enum Repr {
    Expr(Arc<Expr>),
    /// `coef · x^exponent`
    Power { coef: f64, exponent: f64 },
    /// `intercept + slope · x`
    Affine { intercept: f64, slope: f64 },
    /// `exp(-theta x)`
    ExpSurvival { theta: f64 },
    /// `(1 + x)^{-c}`
    Pareto { c: f64 },
    /// `exp(-kappa x^eta)`
    Weibull { kappa: f64, eta: f64 },
    Custom { f: RealFn, ln_f: Option<RealFn> },
}

impl Repr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Repr::Expr(e) => e.eval(x),
            Repr::Power { coef, exponent } => {
                if *exponent == 0.0 {
                    *coef
                } else if *exponent == 1.0 {
                    coef * x
                } else {
                    coef * x.powf(*exponent)
                }
            }
            Repr::Affine { intercept, slope } => intercept + slope * x,
            Repr::ExpSurvival { theta } => (-theta * x).exp(),
            Repr::Pareto { c } => (1.0 + x).powf(-c),
            Repr::Weibull { kappa, eta } => (-kappa * x.powf(*eta)).exp(),
            Repr::Custom { f, .. } => f(x),
        }
    }

    fn ln_eval(&self, x: f64) -> f64 {
        match self {
            Repr::Expr(e) => e.ln_eval(x),
            Repr::Power { coef, exponent } => {
                if *exponent == 0.0 {
                    coef.ln()
                } else {
                    coef.ln() + exponent * x.ln()
                }
            }
            Repr::ExpSurvival { theta } => -theta * x,
            Repr::Pareto { c } => -c * x.ln_1p(),
            Repr::Weibull { kappa, eta } => -kappa * x.powf(*eta),
            Repr::Custom { ln_f: Some(g), .. } => g(x),
            _ => self.eval(x).ln(),
        }
    }
}

/// A nonnegative function of the state; houses `α` and `β`.
#[derive(Clone)]
pub struct RateFunction {
    source: Source,
    pub(crate) repr: Repr,
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RateFunction({})", self.source)
    }
}

impl RateFunction {
    pub fn from_expr(text: &str) -> Result<Self, super::expr::ParseError> {
        let e = Expr::parse(text)?;
        Ok(Self { source: Source::Expr(text.to_string()), repr: Repr::Expr(Arc::new(e)) })
    }

    pub(crate) fn from_repr(source: Source, repr: Repr) -> Self {
        Self { source, repr }
    }

    /// A closure-backed function, optionally with an accurate logarithm.
    pub fn custom(label: impl Into<String>, f: RealFn, ln_f: Option<RealFn>) -> Self {
        Self { source: Source::Composed(label.into()), repr: Repr::Custom { f, ln_f } }
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        self.repr.eval(x)
    }

    #[inline]
    pub fn ln_evaluate(&self, x: f64) -> f64 {
        self.repr.ln_eval(x)
    }

    pub fn try_evaluate(&self, x: f64) -> Result<f64, EvalError> {
        match &self.repr {
            Repr::Expr(e) => e.try_eval(x),
            _ => {
                let v = self.evaluate(x);
                if v.is_nan() {
                    Err(EvalError::Undefined { x })
                } else {
                    Ok(v)
                }
            }
        }
    }

    /// Value at 0 taken as the limit from the right when the formula is
    /// undefined there.
    pub fn at_zero(&self) -> f64 {
        let v = self.evaluate(0.0);
        if v.is_nan() {
            self.evaluate(f64::MIN_POSITIVE)
        } else {
            v
        }
    }

    /// `(coef, exponent)` when the function is a registered power law.
    pub fn as_power(&self) -> Option<(f64, f64)> {
        match self.repr {
            Repr::Power { coef, exponent } => Some((coef, exponent)),
            Repr::Affine { intercept, slope } if intercept == 0.0 => Some((slope, 1.0)),
            Repr::Affine { intercept, slope } if slope == 0.0 => Some((intercept, 0.0)),
            _ => None,
        }
    }

    /// `(intercept, slope)` when the function is a registered affine map.
    pub fn as_affine(&self) -> Option<(f64, f64)> {
        match self.repr {
            Repr::Affine { intercept, slope } => Some((intercept, slope)),
            Repr::Power { coef, exponent } if exponent == 1.0 => Some((0.0, coef)),
            Repr::Power { coef, exponent } if exponent == 0.0 => Some((coef, 0.0)),
            _ => None,
        }
    }

    pub fn has_closed_forms(&self) -> bool {
        !matches!(self.repr, Repr::Expr(_) | Repr::Custom { .. })
    }

    /// A copy that hides registered closed forms, forcing numeric routes.
    pub fn opaque(&self) -> Self {
        let repr = self.repr.clone();
        let ln_repr = self.repr.clone();
        Self {
            source: self.source.clone(),
            repr: Repr::Custom {
                f: Arc::new(move |x| repr.eval(x)),
                ln_f: Some(Arc::new(move |x| ln_repr.ln_eval(x))),
            },
        }
    }
}

/// Survival profile `k` of the separable jump kernel.
#[derive(Clone, Debug)]
pub struct SurvivalFunction {
    inner: RateFunction,
}

impl SurvivalFunction {
    pub fn new(inner: RateFunction) -> Self {
        Self { inner }
    }

    pub fn from_expr(text: &str) -> Result<Self, super::expr::ParseError> {
        RateFunction::from_expr(text).map(Self::new)
    }

    pub fn as_rate(&self) -> &RateFunction {
        &self.inner
    }

    pub fn source(&self) -> &Source {
        self.inner.source()
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        self.inner.evaluate(x)
    }

    #[inline]
    pub fn ln_evaluate(&self, x: f64) -> f64 {
        self.inner.ln_evaluate(x)
    }

    /// `k(0)` as an extended real (`+∞` allowed).
    pub fn at_zero(&self) -> f64 {
        self.inner.at_zero()
    }

    pub fn has_closed_inverse(&self) -> bool {
        self.closed_ln_inverse(0.0).is_some()
    }

    /// Closed-form solution of `ln k(y) = l` for registered families.
    pub fn closed_ln_inverse(&self, l: f64) -> Option<f64> {
        match self.inner.repr {
            Repr::ExpSurvival { theta } => Some(-l / theta),
            Repr::Pareto { c } => Some((-l / c).exp_m1()),
            Repr::Weibull { kappa, eta } => Some((-l / kappa).powf(1.0 / eta)),
            Repr::Power { coef, exponent } if exponent < 0.0 => Some(((l - coef.ln()) / exponent).exp()),
            _ => None,
        }
    }

    /// Closed-form `k⁻¹(u)` for registered families.
    pub fn closed_inverse(&self, u: f64) -> Option<f64> {
        self.closed_ln_inverse(u.ln())
    }

    /// Generalized inverse `inf{y ≥ from : ln k(y) ≤ l}` for `l ≤ ln k(from)`.
    ///
    /// Returns `+∞` when `k` never drops to `e^l`.
    pub fn ln_inverse_from(&self, from: f64, l: f64) -> f64 {
        if let Some(y) = self.closed_ln_inverse(l) {
            return y.max(from);
        }
        let g = |y: f64| self.ln_evaluate(y);
        if g(from) <= l {
            return from;
        }
        let mut lo = from;
        let mut hi = if from > 0.0 { from * 2.0 } else { 1.0 };
        while g(hi) > l {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        // Bisection keeps the right-continuous generalized inverse on flat pieces.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > l {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `k⁻¹(u)` on `(0, ∞)`, `u ∈ (0, k(0)]`.
    pub fn inverse(&self, u: f64) -> f64 {
        self.ln_inverse_from(0.0, u.ln())
    }

    pub fn opaque(&self) -> Self {
        Self { inner: self.inner.opaque() }
    }
}
