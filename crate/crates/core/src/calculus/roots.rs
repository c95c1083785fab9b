//! Bracketed root finding and inversion of monotone functions.

use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("invalid bracket [{lo}, {hi}]: g(lo) = {glo}, g(hi) = {ghi} do not straddle zero")]
    InvalidBracket { lo: f64, hi: f64, glo: f64, ghi: f64 },
    #[error("function is NaN at x = {x}")]
    NotANumber { x: f64 },
    #[error("value {u} lies outside the range [{min}, {max}] of the function")]
    OutOfRange { u: f64, min: f64, max: f64 },
    #[error("could not bracket the preimage of {u}")]
    BracketSearchFailed { u: f64 },
}

/// Brent's method on `[lo, hi]`; falls back to bisection whenever the
/// interpolation step is not contracting fast enough.
pub fn find_root(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64, RootError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa.is_nan() {
        return Err(RootError::NotANumber { x: a });
    }
    if fb.is_nan() {
        return Err(RootError::NotANumber { x: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::InvalidBracket { lo, hi, glo: fa, ghi: fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = g(b);
        if fb.is_nan() {
            return Err(RootError::NotANumber { x: b });
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Evaluator for `f⁻¹` on `f(domain)`.
#[derive(Clone)]
pub struct MonotoneInverse {
    f: RealFn,
    lo: f64,
    hi: f64,
    direction: Direction,
    closed_form: Option<RealFn>,
    tol: f64,
}

impl std::fmt::Debug for MonotoneInverse {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("MonotoneInverse")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("direction", &self.direction)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

/// Build the inverse of a strictly monotone `f` on `[lo, hi]` (endpoints may be infinite).
pub fn monotone_inverse(f: RealFn, lo: f64, hi: f64, direction: Direction) -> MonotoneInverse {
    MonotoneInverse { f, lo, hi, direction, closed_form: None, tol: 1e-14 }
}

impl MonotoneInverse {
    pub fn with_closed_form(mut self, g: RealFn) -> Self {
        self.closed_form = Some(g);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn range(&self) -> (f64, f64) {
        let (a, b) = ((self.f)(self.lo), (self.f)(self.hi));
        (a.min(b), a.max(b))
    }

    pub fn eval(&self, u: f64) -> Result<f64, RootError> {
        let (min, max) = self.range();
        if u.is_nan() || u < min || u > max {
            return Err(RootError::OutOfRange { u, min, max });
        }
        if let Some(g) = &self.closed_form {
            return Ok(g(u));
        }
        let sign = match self.direction {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        };
        let g = |x: f64| sign * ((self.f)(x) - u);
        let (mut a, mut b) = (self.lo, self.hi);
        // Replace infinite ends by finite points that still bracket the preimage.
        if !b.is_finite() {
            let mut probe = if a.is_finite() { a.abs().max(1.0) + a.max(0.0) } else { 1.0 };
            let mut found = false;
            for _ in 0..2100 {
                if g(probe) >= 0.0 {
                    found = true;
                    break;
                }
                probe *= 2.0;
            }
            if !found {
                return Err(RootError::BracketSearchFailed { u });
            }
            b = probe;
        }
        if !a.is_finite() {
            let mut probe = b.min(0.0) - b.abs().max(1.0);
            let mut found = false;
            for _ in 0..2100 {
                if g(probe) <= 0.0 {
                    found = true;
                    break;
                }
                probe *= 2.0;
            }
            if !found {
                return Err(RootError::BracketSearchFailed { u });
            }
            a = probe;
        }
        let tol = self.tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        find_root(&g, a, b, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn roots_of_examples() {
        assert_relative_eq!(find_root(&|x| x * x - 4.0, 0.0, 10.0, 1e-12).unwrap(), 2.0, epsilon = 1e-11);
        assert_relative_eq!(find_root(&|x: f64| x.ln(), 0.1, 3.0, 1e-12).unwrap(), 1.0, epsilon = 1e-11);
        assert!(matches!(find_root(&|x| x - 5.0, 0.0, 1.0, 1e-12), Err(RootError::InvalidBracket { .. })));
    }

    #[test]
    fn bisection_fallback_on_step_function() {
        let r = find_root(&|x| if x < 0.7 { -1.0 } else { 1.0 }, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.7).abs() < 1e-10);
    }

    #[test]
    fn exp_inverse() {
        let inv = monotone_inverse(Arc::new(f64::exp), -10.0, 10.0, Direction::Increasing);
        assert!(inv.eval(1.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn survival_inverse_closed_form_and_range() {
        let theta = 2.0;
        let k: RealFn = Arc::new(move |x: f64| (-theta * x).exp());
        let inv = monotone_inverse(k.clone(), 0.0, f64::INFINITY, Direction::Decreasing)
            .with_closed_form(Arc::new(move |u: f64| -u.ln() / theta));
        assert_relative_eq!(inv.eval((-4.0f64).exp()).unwrap(), 2.0, max_relative = 1e-14);
        assert!(matches!(inv.eval(2.0), Err(RootError::OutOfRange { .. })));
        // Numeric route over an infinite domain.
        let num = monotone_inverse(k, 0.0, f64::INFINITY, Direction::Decreasing);
        assert_relative_eq!(num.eval((-4.0f64).exp()).unwrap(), 2.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn inverse_after_function_is_identity(x in -20.0f64..20.0) {
            let f: RealFn = Arc::new(|x: f64| x.powi(3) + x);
            let inv = monotone_inverse(f.clone(), f64::NEG_INFINITY, f64::INFINITY, Direction::Increasing);
            let back = inv.eval(f(x)).unwrap();
            prop_assert!((back - x).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }
}
