//! Tabulated antiderivatives on a fixed geometric grid.
//!
//! A [`Cumulative`] stores `∫ f` between consecutive nodes `2^{j/8}`,
//! `j ∈ [-512, 512]`, accumulated outward from an anchor. Values between
//! nodes are completed by an adaptive partial integral, so the table is as
//! smooth in `x` as the underlying quadrature. The integrand is not stored;
//! callers pass it back in on every query, which keeps the table free of
//! self-references when the integrand itself depends on other tables.

use super::quadrature::{adaptive, integrate_with, QuadOptions, QuadResult, QuadratureError};

const PER_OCTAVE: i32 = 8;
const OCTAVES: i32 = 64;
const HALF: usize = (PER_OCTAVE * OCTAVES) as usize;

/// Where the antiderivative is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    /// `F(x) = ∫_1^x f`.
    One,
    /// `F(x) = ∫_0^x f`.
    Zero,
    /// `F(x) = ∫_x^∞ f`.
    Infinity,
}

#[derive(Debug, Clone)]
pub struct Cumulative {
    anchor: Anchor,
    nodes: Vec<f64>,
    cum: Vec<f64>,
    at_zero: f64,
    at_infinity: f64,
}

fn seg_opts() -> QuadOptions {
    QuadOptions::relative(1e-13, 1e-300)
}

fn limit_opts() -> QuadOptions {
    QuadOptions::relative(1e-12, 1e-300)
}

fn tolerant(r: QuadResult) -> Result<f64, QuadratureError> {
    match r {
        Ok(r) => Ok(r.value),
        Err(QuadratureError::NoConvergence { best, .. }) => Ok(best.value),
        Err(e) => Err(e),
    }
}

fn partial(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    tolerant(adaptive(f, a, b, &seg_opts()))
}

/// `∫_a^b f` over blocks spanning at most eight octaves each, so that
/// integrals reaching far past the grid stay well resolved.
fn partial_blocks(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadratureError> {
    const SPAN: f64 = 256.0;
    let mut sum = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = if lo * SPAN < b { lo * SPAN } else { b };
        sum += partial(f, lo, hi)?;
        lo = hi;
    }
    Ok(sum)
}

fn improper(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadratureError> {
    tolerant(integrate_with(f, a, b, &limit_opts()))
}

impl Cumulative {
    pub fn build(f: &dyn Fn(f64) -> f64, anchor: Anchor) -> Result<Self, QuadratureError> {
        let nodes: Vec<f64> = (-(HALF as i32)..=HALF as i32)
            .map(|j| (j as f64 / PER_OCTAVE as f64).exp2())
            .collect();
        let n = nodes.len();
        let mut seg = Vec::with_capacity(n - 1);
        for w in nodes.windows(2) {
            seg.push(partial(f, w[0], w[1])?);
        }
        let head = || improper(f, 0.0, nodes[0]);
        let tail = || improper(f, nodes[n - 1], f64::INFINITY);
        let mut cum = vec![0.0; n];
        let (at_zero, at_infinity);
        match anchor {
            Anchor::One => {
                for i in HALF..n - 1 {
                    cum[i + 1] = cum[i] + seg[i];
                }
                for i in (0..HALF).rev() {
                    cum[i] = cum[i + 1] - seg[i];
                }
                at_zero = cum[0] - head()?;
                at_infinity = cum[n - 1] + tail()?;
            }
            Anchor::Zero => {
                cum[0] = head()?;
                for i in 0..n - 1 {
                    cum[i + 1] = cum[i] + seg[i];
                }
                at_zero = 0.0;
                at_infinity = cum[n - 1] + tail()?;
            }
            Anchor::Infinity => {
                cum[n - 1] = tail()?;
                for i in (0..n - 1).rev() {
                    cum[i] = cum[i + 1] + seg[i];
                }
                at_zero = cum[0] + head()?;
                at_infinity = 0.0;
            }
        }
        Ok(Self { anchor, nodes, cum, at_zero, at_infinity })
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    /// Limit of the antiderivative as `x → 0⁺` (possibly infinite).
    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    /// Limit of the antiderivative as `x → ∞` (possibly infinite).
    pub fn at_infinity(&self) -> f64 {
        self.at_infinity
    }

    fn lower(&self) -> f64 {
        self.nodes[0]
    }

    fn upper(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index `i` with `nodes[i] <= x < nodes[i + 1]` for `x` inside the grid.
    fn cell(&self, x: f64) -> usize {
        let last = self.nodes.len() - 2;
        let guess = (x.log2() * PER_OCTAVE as f64).floor() as i64 + HALF as i64;
        let mut i = guess.clamp(0, last as i64) as usize;
        while i > 0 && self.nodes[i] > x {
            i -= 1;
        }
        while i < last && self.nodes[i + 1] <= x {
            i += 1;
        }
        i
    }

    pub fn value(&self, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64, QuadratureError> {
        if x <= 0.0 {
            return Ok(self.at_zero);
        }
        if x == f64::INFINITY {
            return Ok(self.at_infinity);
        }
        let n = self.nodes.len();
        if x < self.lower() {
            return Ok(match self.anchor {
                Anchor::One => self.cum[0] - partial_blocks(f, x, self.lower())?,
                Anchor::Zero => improper(f, 0.0, x)?,
                Anchor::Infinity => self.cum[0] + partial_blocks(f, x, self.lower())?,
            });
        }
        if x >= self.upper() {
            return Ok(match self.anchor {
                Anchor::One | Anchor::Zero => self.cum[n - 1] + partial_blocks(f, self.upper(), x)?,
                Anchor::Infinity => improper(f, x, f64::INFINITY)?,
            });
        }
        let i = self.cell(x);
        let (lo, hi) = (self.nodes[i], self.nodes[i + 1]);
        Ok(match self.anchor {
            Anchor::One if i < HALF => self.cum[i + 1] - partial(f, x, hi)?,
            Anchor::One | Anchor::Zero => self.cum[i] + partial(f, lo, x)?,
            Anchor::Infinity => self.cum[i + 1] + partial(f, x, hi)?,
        })
    }

    /// Generalized inverse of a table built from a nonnegative integrand.
    ///
    /// Increasing tables return `inf{x : F(x) ≥ v}`, decreasing (tail) tables
    /// `inf{x : F(x) ≤ v}`; values beyond the limits map to `0` or `∞`.
    pub fn inverse(&self, f: &dyn Fn(f64) -> f64, v: f64) -> Result<f64, QuadratureError> {
        let increasing = self.anchor != Anchor::Infinity;
        let sign = if increasing { 1.0 } else { -1.0 };
        // Signed so that the objective is increasing in x.
        let g = |x: f64| -> Result<f64, QuadratureError> { Ok(sign * (self.value(f, x)? - v)) };
        if increasing {
            if v <= self.at_zero {
                return Ok(0.0);
            }
            if v >= self.at_infinity {
                return Ok(f64::INFINITY);
            }
        } else {
            if v >= self.at_zero {
                return Ok(0.0);
            }
            if v <= self.at_infinity {
                return Ok(f64::INFINITY);
            }
        }
        let n = self.nodes.len();
        let first = sign * (self.cum[0] - v);
        let last = sign * (self.cum[n - 1] - v);
        let (mut a, mut b);
        // Off the grid, step outward by doubling the number of octaves.
        if first > 0.0 {
            b = self.lower();
            let mut octaves = 8;
            a = b * (-(octaves as f64)).exp2();
            while g(a)? > 0.0 {
                b = a;
                octaves *= 2;
                a = b * (-(octaves as f64)).exp2();
                if a == 0.0 {
                    a = f64::MIN_POSITIVE * f64::EPSILON;
                    if g(a)? > 0.0 {
                        return Ok(0.0);
                    }
                }
            }
        } else if last < 0.0 {
            a = self.upper();
            let mut octaves = 8;
            b = a * (octaves as f64).exp2();
            while g(b)? < 0.0 {
                a = b;
                octaves *= 2;
                b = a * (octaves as f64).exp2();
                if !b.is_finite() {
                    b = f64::MAX;
                    if g(b)? < 0.0 {
                        return Ok(f64::INFINITY);
                    }
                }
            }
        } else {
            // Binary search on the tabulated values.
            let (mut lo, mut hi) = (0usize, n - 1);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if sign * (self.cum[mid] - v) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            a = self.nodes[lo];
            b = self.nodes[hi];
        }
        if g(a)? >= 0.0 {
            return Ok(a);
        }
        let (ga, gb) = (g(a)?, g(b)?);
        let mut x = if gb > ga { a + (b - a) * (-ga / (gb - ga)).clamp(0.0, 1.0) } else { 0.5 * (a + b) };
        // Bisect geometrically while the bracket spans orders of magnitude.
        let mid = |a: f64, b: f64| if b > 4.0 * a && a > 0.0 { a.sqrt() * b.sqrt() } else { 0.5 * (a + b) };
        for _ in 0..400 {
            if !(x > a && x < b) {
                x = mid(a, b);
            }
            let gx = g(x)?;
            if gx == 0.0 {
                return Ok(x);
            }
            if gx < 0.0 {
                a = x;
            } else {
                b = x;
            }
            if b - a <= 4.0 * f64::EPSILON * b {
                return Ok(0.5 * (a + b));
            }
            // g' = f for both orientations.
            let d = f(x);
            let step = gx / d;
            let newton = x - step;
            if d > 0.0 && newton.is_finite() && newton > a && newton < b {
                if step.abs() <= 2.0 * f64::EPSILON * x {
                    return Ok(newton);
                }
                x = newton;
            } else {
                x = mid(a, b);
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_table() {
        let f = |y: f64| 1.0 / y;
        let t = Cumulative::build(&f, Anchor::One).unwrap();
        for &x in &[1e-200, 1e-30, 1e-7, 0.3, 1.0, 2.5, 1e5, 1e25, 1e250] {
            let v = t.value(&f, x).unwrap();
            assert!((v - x.ln()).abs() <= 1e-12 * x.ln().abs().max(1.0), "x={x} v={v}");
            let back = t.inverse(&f, x.ln()).unwrap();
            assert_relative_eq!(back, x, max_relative = 1e-12);
        }
        assert_eq!(t.at_zero(), f64::NEG_INFINITY);
        assert_eq!(t.at_infinity(), f64::INFINITY);
    }

    #[test]
    fn zero_and_infinity_anchors() {
        let f = |y: f64| (-y).exp();
        let head = Cumulative::build(&f, Anchor::Zero).unwrap();
        let tail = Cumulative::build(&f, Anchor::Infinity).unwrap();
        for &x in &[1e-25, 0.01, 1.0, 7.0, 40.0, 300.0] {
            assert_relative_eq!(head.value(&f, x).unwrap(), -(-x).exp_m1(), max_relative = 1e-12);
            assert_relative_eq!(tail.value(&f, x).unwrap(), (-x).exp(), max_relative = 1e-11);
        }
        assert_relative_eq!(head.at_infinity(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(tail.at_zero(), 1.0, max_relative = 1e-12);
        let x = tail.inverse(&f, (-3.0f64).exp()).unwrap();
        assert_relative_eq!(x, 3.0, max_relative = 1e-12);
        let x = head.inverse(&f, 0.5).unwrap();
        assert_relative_eq!(x, 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn finite_limit_inverse_saturates() {
        let f = |y: f64| 1.0 / (1.0 + y * y);
        let t = Cumulative::build(&f, Anchor::One).unwrap();
        let quarter = std::f64::consts::FRAC_PI_4;
        assert_relative_eq!(t.at_zero(), -quarter, max_relative = 1e-11);
        assert_relative_eq!(t.at_infinity(), quarter, max_relative = 1e-11);
        assert_eq!(t.inverse(&f, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(t.inverse(&f, -1.0).unwrap(), 0.0);
        assert_relative_eq!(t.inverse(&f, 0.3f64.atan() - quarter).unwrap(), 0.3, max_relative = 1e-11);
    }
}
