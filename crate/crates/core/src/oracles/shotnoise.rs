use serde::Serialize;

use crate::calculus::{integrate_with, QuadOptions};
use crate::error::{invalid, Error, Result};
use crate::model::{ModelTriple, ParamFamily};
use crate::rng::RngStream;

/// Shot-noise with response `e^{−αt}`, Poisson shot rate `β` and
/// exponential marks of rate `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotNoiseParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

impl ShotNoiseParams {
    pub fn new(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("theta", theta)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self { alpha, beta, theta })
    }

    /// Shape of the stationary Gamma law, `γ = β/α`.
    pub fn gamma(&self) -> f64 {
        self.beta / self.alpha
    }

    /// The decay-surge triple `(αx, β, e^{−θy})`.
    pub fn triple(&self) -> Result<ModelTriple> {
        Ok(ModelTriple::new(
            ParamFamily::new("power", &[("coef", self.alpha), ("exponent", 1.0)])?.rate(),
            ParamFamily::new("constant", &[("value", self.beta)])?.rate(),
            ParamFamily::new("exponential-survival", &[("theta", self.theta)])?.survival(),
        ))
    }
}

/// Stationary Laplace transform `(1 + q/θ)^{−γ}`.
pub fn shotnoise_stationary_lst(params: &ShotNoiseParams, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return invalid(format!("transform argument must be non-negative, got {q}"));
    }
    Ok((-params.gamma() * (q / params.theta).ln_1p()).exp())
}

/// Campbell's formula `exp(−(β/α)∫₀¹ (1 − φ(qu))/u du)` for an arbitrary
/// mark transform `φ`.
pub fn campbell_lst(alpha: f64, beta: f64, mark_lst: &dyn Fn(f64) -> f64, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return invalid(format!("transform argument must be non-negative, got {q}"));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let f = |u: f64| (1.0 - mark_lst(q * u)) / u;
    let r = integrate_with(&f, 0.0, 1.0, &QuadOptions::relative(1e-12, 1e-300)).map_err(Error::Quadrature)?;
    Ok((-(beta / alpha) * r.value).exp())
}

/// `X_T = x0·e^{−αT} + Σ_{S≤T} Y·e^{−α(T−S)}` from a direct Poisson draw.
pub fn shotnoise_simulate_value(params: &ShotNoiseParams, x0: f64, horizon: f64, rng: &mut RngStream) -> f64 {
    let mut v = x0 * (-params.alpha * horizon).exp();
    let mut t = 0.0;
    loop {
        t += rng.exponential(params.beta);
        if t > horizon {
            return v;
        }
        v += rng.exponential(params.theta) * (-params.alpha * (horizon - t)).exp();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;

    #[test]
    fn normalization_at_zero() {
        let p = ShotNoiseParams::new(1.0, 0.5, 1.0).unwrap();
        assert_eq!(shotnoise_stationary_lst(&p, 0.0).unwrap(), 1.0);
        assert!(shotnoise_stationary_lst(&p, -1.0).is_err());
    }

    #[test]
    fn campbell_quadrature_matches_gamma_transform() {
        let p = ShotNoiseParams::new(2.0, 3.0, 0.7).unwrap();
        let phi = |v: f64| p.theta / (p.theta + v);
        for q in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let a = shotnoise_stationary_lst(&p, q).unwrap();
            let b = campbell_lst(p.alpha, p.beta, &phi, q).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "{q}: {a} vs {b}");
        }
    }

    #[test]
    fn campbell_with_constant_marks() {
        // Marks ≡ 1: ∫₀¹ (1 − e^{−qu})/u du = Ein(q), the entire exponential
        // integral; Ein(1) = 0.7965995992970531.
        let v = campbell_lst(1.0, 1.0, &|s: f64| (-s).exp(), 1.0).unwrap();
        assert!((v - (-0.796_599_599_297_053_1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn direct_simulation_hits_stationary_transform() {
        let p = ShotNoiseParams::new(1.0, 0.5, 1.0).unwrap();
        let xs: Vec<f64> = (0..20_000).map(|i| shotnoise_simulate_value(&p, 1.0, 30.0, &mut RngStream::new(5, i))).collect();
        for q in [0.5, 1.0, 2.0] {
            let e: Vec<f64> = xs.iter().map(|x| (-q * x).exp()).collect();
            let (m, se) = mean_se(&e);
            let want = shotnoise_stationary_lst(&p, q).unwrap();
            assert!((m - want).abs() < 3.5 * se, "{q}: {m} ± {se} vs {want}");
        }
    }
}
