use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::{ModelTriple, ParamFamily};
use crate::rng::{par_streams, RngStream};

/// Linear self-exciting process with decay `α₁`, excitation slope `β₁`,
/// immigration rate `μ` and unit-mean exponential marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HawkesParams {
    pub alpha1: f64,
    pub beta1: f64,
    pub mu: f64,
}

impl HawkesParams {
    pub fn new(alpha1: f64, beta1: f64, mu: f64) -> Result<Self> {
        let p = Self { alpha1, beta1, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha1.is_finite()) {
            return invalid(format!("alpha1 must be positive, got {}", self.alpha1));
        }
        if !(self.beta1 >= 0.0 && self.beta1.is_finite()) {
            return invalid(format!("beta1 must be non-negative, got {}", self.beta1));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return invalid(format!("mu must be non-negative, got {}", self.mu));
        }
        Ok(())
    }

    /// Branching ratio `γ₁ = β₁/α₁`.
    pub fn gamma1(&self) -> f64 {
        self.beta1 / self.alpha1
    }

    /// The equivalent decay-surge triple `(α₁x, μ + β₁x, e^{−y})`.
    pub fn triple(&self) -> Result<ModelTriple> {
        let alpha = ParamFamily::new("power", &[("coef", self.alpha1), ("exponent", 1.0)])?.rate();
        let beta = if self.mu == 0.0 {
            ParamFamily::new("power", &[("coef", self.beta1), ("exponent", 1.0)])?.rate()
        } else {
            ParamFamily::new("linear", &[("intercept", self.mu), ("slope", self.beta1)])?.rate()
        };
        let k = ParamFamily::new("exponential-survival", &[("theta", 1.0)])?.survival();
        Ok(ModelTriple::new(alpha, beta, k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HawkesJump {
    pub time: f64,
    pub mark: f64,
    /// 1 for jumps excited by the initial mass or immigrants, `g + 1` for
    /// children of a generation-`g` jump.
    pub generation: u32,
    /// Index of the parent jump in the cluster, before time sorting.
    pub parent: Option<usize>,
    pub children: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HawkesCluster {
    /// Jumps sorted by time.
    pub jumps: Vec<HawkesJump>,
    pub guard_tripped: bool,
}

impl HawkesCluster {
    pub fn max_generation(&self) -> u32 {
        self.jumps.iter().map(|j| j.generation).max().unwrap_or(0)
    }
}

/// Poisson points on `(start, horizon]` of the rate `mass·β₁·e^{−α₁(t−start)}`,
/// drawn by exponential spacing in the integrated-rate clock.
fn offspring_times(p: &HawkesParams, start: f64, mass: f64, horizon: f64, rng: &mut RngStream, out: &mut Vec<f64>) {
    let total = p.beta1 * mass / p.alpha1;
    let mut clock = 0.0;
    loop {
        clock += rng.exponential(1.0);
        if clock >= total {
            return;
        }
        let t = start - (-clock / total).ln_1p() / p.alpha1;
        if t > horizon {
            return;
        }
        out.push(t);
    }
}

/// Branching construction on `[0, horizon]` (`horizon` may be `∞`).
///
/// Generation 1 is driven by the initial mass `x0` and, when `μ > 0`, by a
/// homogeneous Poisson stream of immigrants; every jump of mark `Y` born at
/// `S` seeds an independent process of rate `β₁Y e^{−α₁(t−S)}`.
pub fn hawkes_cluster_simulate(
    params: &HawkesParams,
    x0: f64,
    horizon: f64,
    max_jumps: usize,
    rng: &mut RngStream,
) -> Result<HawkesCluster> {
    params.validate()?;
    if !(x0 >= 0.0 && x0.is_finite()) {
        return invalid(format!("initial mass must be finite and non-negative, got {x0}"));
    }
    if !(horizon > 0.0) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    if params.mu > 0.0 && !horizon.is_finite() {
        return invalid("immigration needs a finite horizon");
    }
    let mut jumps: Vec<HawkesJump> = Vec::new();
    let mut times = Vec::new();
    offspring_times(params, 0.0, x0, horizon, rng, &mut times);
    if params.mu > 0.0 {
        let mut t = 0.0;
        loop {
            t += rng.exponential(params.mu);
            if t > horizon {
                break;
            }
            times.push(t);
        }
    }
    for &t in &times {
        jumps.push(HawkesJump { time: t, mark: rng.exponential(1.0), generation: 1, parent: None, children: 0 });
    }
    let mut guard_tripped = jumps.len() > max_jumps;
    let mut next = 0;
    while next < jumps.len() && !guard_tripped {
        let parent = jumps[next];
        times.clear();
        offspring_times(params, parent.time, parent.mark, horizon, rng, &mut times);
        jumps[next].children = times.len() as u32;
        for &t in &times {
            jumps.push(HawkesJump {
                time: t,
                mark: rng.exponential(1.0),
                generation: parent.generation + 1,
                parent: Some(next),
                children: 0,
            });
        }
        guard_tripped = jumps.len() > max_jumps;
        next += 1;
    }
    jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(HawkesCluster { jumps, guard_tripped })
}

/// `X_t = x0·e^{−α₁t} + Σ_{S≤t} Y·e^{−α₁(t−S)}` for time-sorted jumps.
///
/// The decay of `x0` is evaluated as `x0 * exp(−α₁t)` so that paths with no
/// jumps land bitwise on the value the generic sampler produces.
pub fn hawkes_superposition_value(alpha1: f64, jumps: &[HawkesJump], x0: f64, t: f64) -> f64 {
    let mut v = x0 * (-alpha1 * t).exp();
    for j in jumps.iter().take_while(|j| j.time <= t) {
        v += j.mark * (-alpha1 * (t - j.time)).exp();
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffspringEstimate {
    pub parents: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub clusters: usize,
}

/// Mean number of direct children per jump over complete (untruncated)
/// clusters, accumulating clusters until `min_parents` jumps are seen.
pub fn offspring_mean(params: &HawkesParams, x0: f64, min_parents: usize, seed: u64) -> Result<OffspringEstimate> {
    if params.gamma1() >= 1.0 {
        return invalid("offspring counting needs a subcritical branching ratio");
    }
    let p = HawkesParams { mu: 0.0, ..*params };
    let (mut n, mut sum, mut sum2, mut clusters) = (0usize, 0.0, 0.0, 0usize);
    let mut path = 0;
    while n < min_parents {
        let mut rng = RngStream::new(seed, path);
        path += 1;
        let c = hawkes_cluster_simulate(&p, x0, f64::INFINITY, usize::MAX, &mut rng)?;
        clusters += 1;
        for j in &c.jumps {
            let k = j.children as f64;
            sum += k;
            sum2 += k * k;
            n += 1;
        }
    }
    let mean = sum / n as f64;
    let var = (sum2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
    Ok(OffspringEstimate { parents: n, mean, standard_error: (var / n as f64).sqrt(), clusters })
}

/// Fraction of `n` clusters started from mass `x0` whose total size exceeds
/// `threshold` jumps.
pub fn large_cluster_fraction(params: &HawkesParams, x0: f64, n: u64, threshold: usize, seed: u64) -> Result<f64> {
    let p = HawkesParams { mu: 0.0, ..*params };
    let big = par_streams(n, seed, |rng| {
        hawkes_cluster_simulate(&p, x0, f64::INFINITY, threshold, rng).map(|c| c.guard_tripped)
    });
    let mut hits = 0;
    for b in big {
        hits += b? as usize;
    }
    Ok(hits as f64 / n as f64)
}
