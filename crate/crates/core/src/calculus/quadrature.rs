//! Adaptive Gauss–Kronrod quadrature with improper-endpoint handling.
//!
//! Finite, regular intervals use a globally adaptive 10/21-point Gauss–Kronrod
//! pair. Infinite endpoints and finite endpoints where the integrand is not
//! finite are handled by summing the integral over geometric blocks
//! (`[c·2^j, c·2^{j+1}]` toward infinity, halving widths toward a finite
//! point). The block sums also drive divergence detection.

use serde::Serialize;
use thiserror::Error;

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Maximum bisection depth of any subinterval.
pub const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand is NaN at x = {x}")]
    NotANumber { x: f64 },
    #[error("no convergence after {subdivisions} subdivisions (best estimate {} ± {})", best.value, best.error_estimate)]
    NoConvergence {
        best: QuadratureResult,
        subdivisions: usize,
    },
}

pub type QuadResult = std::result::Result<QuadratureResult, QuadratureError>;

/// Knobs for [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Partial sums beyond this magnitude are declared divergent.
    pub divergence_threshold: f64,
    /// Consecutive non-decaying geometric blocks that signal divergence.
    pub divergence_run: usize,
    /// Block-to-block ratio at or above which a block counts as non-decaying.
    pub decay_ratio: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self::with_tol(DEFAULT_TOL)
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            max_subdivisions: 4000,
            divergence_threshold: 1e300,
            divergence_run: 16,
            decay_ratio: 0.97,
        }
    }

    /// Purely relative accuracy, with an absolute floor of `floor`.
    pub fn relative(rel_tol: f64, floor: f64) -> Self {
        Self {
            abs_tol: floor,
            rel_tol,
            ..Self::with_tol(rel_tol)
        }
    }
}

// Kronrod abscissae and weights for the 21-point rule; the embedded 10-point
// Gauss rule uses the odd-indexed abscissae.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980373730,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

/// One 21-point Kronrod panel; returns (value, error estimate).
fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * a + 0.5 * b;
    let half = 0.5 * (b - a);
    let fc = f(center);
    if fc.is_nan() {
        return Err(QuadratureError::NotANumber { x: center });
    }
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if f1.is_nan() {
            return Err(QuadratureError::NotANumber { x: x1 });
        }
        if f2.is_nan() {
            return Err(QuadratureError::NotANumber { x: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && roundoff > err {
        err = roundoff;
    }
    Ok((value, err))
}

/// Globally adaptive integration over a finite interval with a finite integrand.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 1 });
    }
    let (v, e) = gk21(f, a, b)?;
    let mut evaluations = 21;
    let mut panels = vec![Panel { a, b, value: v, error: e, depth: 0 }];
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return Ok(QuadratureResult { value: total, error_estimate: f64::INFINITY, evaluations });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(QuadratureResult { value: total, error_estimate: total_err, evaluations });
        }
        // Worst panel still allowed to split.
        let mut worst: Option<usize> = None;
        for (i, p) in panels.iter().enumerate() {
            if p.depth < MAX_DEPTH && worst.is_none_or(|w| p.error > panels[w].error) {
                worst = Some(i);
            }
        }
        let stuck = match worst {
            None => true,
            Some(_) => panels.len() >= opts.max_subdivisions,
        };
        if stuck {
            return Err(QuadratureError::NoConvergence {
                best: QuadratureResult { value: total, error_estimate: total_err, evaluations },
                subdivisions: panels.len(),
            });
        }
        let w = worst.unwrap_or_default();
        let p = panels.swap_remove(w);
        let mid = 0.5 * p.a + 0.5 * p.b;
        if mid <= p.a || mid >= p.b {
            // Interval too narrow to split further in floating point.
            panels.push(Panel { depth: MAX_DEPTH, ..p });
            continue;
        }
        let (v1, e1) = gk21(f, p.a, mid)?;
        let (v2, e2) = gk21(f, mid, p.b)?;
        evaluations += 42;
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        panels.push(Panel { a: p.a, b: mid, value: v1, error: e1, depth: p.depth + 1 });
        panels.push(Panel { a: mid, b: p.b, value: v2, error: e2, depth: p.depth + 1 });
        // Resum occasionally to keep cancellation in the running totals in check.
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.value).sum();
            total_err = panels.iter().map(|p| p.error).sum();
        }
    }
}

/// Direction in which geometric blocks advance.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Toward {
    /// Blocks `[c·2^j, c·2^{j+1}]`, `c > 0`.
    Infinity { c: f64 },
    /// Blocks `[p + h·2^{-j-1}, p + h·2^{-j}]` (or mirrored when `h < 0`).
    Point { p: f64, h: f64 },
}

/// Sum an integral over geometric blocks, detecting divergence from the block
/// sequence. The result is signed in the natural orientation of the blocks'
/// union: increasing `x` for both variants.
fn block_series(f: &dyn Fn(f64) -> f64, toward: Toward, opts: &QuadOptions) -> QuadResult {
    let mut sum = 0.0_f64;
    let mut err = 0.0_f64;
    let mut evaluations = 0usize;
    let mut prev_block: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    let mut nondecay_run = 0usize;
    for j in 0..4096i32 {
        let (lo, hi) = match toward {
            Toward::Infinity { c } => (c * 2f64.powi(j), c * 2f64.powi(j + 1)),
            Toward::Point { p, h } => {
                let near = p + h * 2f64.powi(-j - 1);
                let far = p + h * 2f64.powi(-j);
                if h > 0.0 {
                    (near, far)
                } else {
                    (far, near)
                }
            }
        };
        let exhausted = match toward {
            Toward::Infinity { .. } => !hi.is_finite() || hi > 1e300,
            Toward::Point { p, h } => lo == hi || lo == p || hi == p || h.abs() * 2f64.powi(-j) <= 1e-11 * p.abs(),
        };
        if exhausted {
            let decaying = ratios.last().is_none_or(|&r| r < 1.0);
            if decaying {
                // Floating point ran out of room; extrapolate what is left.
                let r = ratios.last().copied().unwrap_or(0.0);
                let tail = prev_block.unwrap_or(0.0) * r / (1.0 - r);
                return Ok(QuadratureResult { value: sum + tail, error_estimate: err + tail.abs(), evaluations });
            }
            return Ok(divergent(sum, evaluations));
        }
        let block_opts = QuadOptions {
            abs_tol: (opts.rel_tol * sum.abs() * 1e-2).max(f64::MIN_POSITIVE),
            ..*opts
        };
        let r = adaptive(f, lo, hi, &block_opts);
        let block = match r {
            Ok(r) => {
                evaluations += r.evaluations;
                err += r.error_estimate;
                r.value
            }
            Err(QuadratureError::NoConvergence { best, .. }) => {
                // Accept a tiny block whose absolute error is already negligible.
                evaluations += best.evaluations;
                if best.error_estimate <= opts.abs_tol.max(opts.rel_tol * sum.abs()) {
                    err += best.error_estimate;
                    best.value
                } else {
                    return Err(QuadratureError::NoConvergence {
                        best: QuadratureResult {
                            value: sum + best.value,
                            error_estimate: err + best.error_estimate,
                            evaluations,
                        },
                        subdivisions: opts.max_subdivisions,
                    });
                }
            }
            Err(e) => return Err(e),
        };
        sum += block;
        if !sum.is_finite() || sum.abs() > opts.divergence_threshold {
            return Ok(divergent(sum, evaluations));
        }
        let ratio = match prev_block {
            None => f64::NAN,
            Some(p) if p == 0.0 => {
                if block == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Some(p) => (block / p).abs(),
        };
        prev_block = Some(block);
        if ratio.is_nan() {
            continue;
        }
        ratios.push(ratio);
        if ratio >= opts.decay_ratio {
            nondecay_run += 1;
            if nondecay_run >= opts.divergence_run && block != 0.0 {
                return Ok(divergent(sum, evaluations));
            }
            continue;
        }
        nondecay_run = 0;
        if ratios.len() < 3 {
            continue;
        }
        let n = ratios.len();
        let r = ratios[n - 1].max(ratios[n - 2]);
        if r >= opts.decay_ratio {
            continue;
        }
        // Geometric extrapolation of the remaining blocks.
        let tail = block * r / (1.0 - r);
        if tail.abs() <= opts.abs_tol.max(opts.rel_tol * sum.abs()) {
            return Ok(QuadratureResult {
                value: sum + tail,
                error_estimate: err + tail.abs(),
                evaluations,
            });
        }
    }
    Ok(divergent(sum, evaluations))
}

fn divergent(sum: f64, evaluations: usize) -> QuadratureResult {
    let value = if sum < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
    QuadratureResult { value, error_estimate: f64::INFINITY, evaluations: evaluations.max(1) }
}

fn combine(parts: &[QuadratureResult]) -> QuadratureResult {
    let value: f64 = parts.iter().map(|p| p.value).sum();
    // +∞ and −∞ together: report NaN-free +∞ only if signs agree.
    QuadratureResult {
        value,
        error_estimate: parts.iter().map(|p| p.error_estimate).sum(),
        evaluations: parts.iter().map(|p| p.evaluations).sum::<usize>().max(1),
    }
}

/// `∫_a^b f` with default options and tolerance `tol` (relative and absolute).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> QuadResult {
    integrate_with(f, a, b, &QuadOptions::with_tol(tol))
}

/// `∫_a^b f` for extended-real `a < b`.
///
/// Divergent integrals are returned as `Ok` with an infinite value.
pub fn integrate_with(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(opts.rel_tol.min(opts.abs_tol)));
    }
    if a.is_nan() || b.is_nan() || a > b {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 1 });
    }
    if a == f64::NEG_INFINITY || b == f64::INFINITY {
        if a == f64::NEG_INFINITY && b == f64::INFINITY {
            let left = integrate_with(f, a, 0.0, opts)?;
            let right = integrate_with(f, 0.0, b, opts)?;
            return Ok(combine(&[left, right]));
        }
        if a == f64::NEG_INFINITY {
            let g = |x: f64| f(-x);
            return integrate_with(&g, -b, f64::INFINITY, opts);
        }
        // [a, ∞): finite head up to c > 0, geometric blocks beyond.
        let c = if a > 0.0 { a } else { a.max(0.0) + 1.0 };
        let head = if c > a { integrate_with(f, a, c, opts)? } else { QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0 } };
        if head.value.is_infinite() {
            return Ok(head);
        }
        let tail = block_series(f, Toward::Infinity { c }, opts)?;
        return Ok(combine(&[head, tail]));
    }
    let singular_a = !f(a).is_finite();
    let singular_b = !f(b).is_finite();
    match (singular_a, singular_b) {
        (false, false) => adaptive(f, a, b, opts),
        (true, false) => {
            let m = a + 0.5 * (b - a);
            let head = block_series(f, Toward::Point { p: a, h: m - a }, opts)?;
            if head.value.is_infinite() {
                return Ok(head);
            }
            let rest = adaptive(f, m, b, opts)?;
            Ok(combine(&[head, rest]))
        }
        (false, true) => {
            let m = a + 0.5 * (b - a);
            let rest = adaptive(f, a, m, opts)?;
            let tail = block_series(f, Toward::Point { p: b, h: m - b }, opts)?;
            Ok(combine(&[rest, tail]))
        }
        (true, true) => {
            let m = a + 0.5 * (b - a);
            let left = block_series(f, Toward::Point { p: a, h: m - a }, opts)?;
            if left.value.is_infinite() {
                return Ok(left);
            }
            let right = block_series(f, Toward::Point { p: b, h: m - b }, opts)?;
            Ok(combine(&[left, right]))
        }
    }
}
