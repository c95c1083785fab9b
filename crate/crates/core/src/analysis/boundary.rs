//! Classification of the boundary 0 and of the long-run regime.

use serde::Serialize;

use super::Analysis;
use crate::error::Result;
use crate::extreal::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryVerdict {
    Regular,
    Entrance,
    Exit,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryClass {
    /// Restart from 0 is possible: `β(0) > 0` and `k(0) < ∞`.
    #[serde(rename = "condition_R")]
    pub condition_r: bool,
    /// 0 is absorbing: `lim_{x↓0} β(x) k(y)/k(x) = 0`.
    #[serde(rename = "condition_A")]
    pub condition_a: bool,
    pub t0_finite: bool,
    pub gamma0_finite: bool,
    pub verdict: BoundaryVerdict,
}

impl BoundaryClass {
    pub fn from_conditions(condition_r: bool, condition_a: bool, t0_finite: bool, gamma0_finite: bool) -> Self {
        let accessible = t0_finite && gamma0_finite;
        let verdict = match (accessible, condition_r) {
            (true, true) => BoundaryVerdict::Regular,
            (true, false) => BoundaryVerdict::Exit,
            (false, true) => BoundaryVerdict::Entrance,
            (false, false) => BoundaryVerdict::Natural,
        };
        Self { condition_r, condition_a, t0_finite, gamma0_finite, verdict }
    }

    pub fn accessible(&self) -> bool {
        self.t0_finite && self.gamma0_finite
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeVerdict {
    HarrisPositiveRecurrent,
    HarrisNullRecurrent,
    /// The process is transient at ∞ or explodes; the two are not separated.
    TransientOrExplosive,
    NoNonconstantScale,
    ExtinctionPossible,
    /// None of the sufficient conditions above applies.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub gamma_at_0: ExtReal,
    pub gamma_at_inf: ExtReal,
    pub s_at_inf: ExtReal,
    pub pi_integrable_at_0: bool,
    pub pi_integrable_at_inf: bool,
    pub beta_at_0: ExtReal,
    pub k_at_0: ExtReal,
    pub boundary: BoundaryClass,
    pub verdict: RegimeVerdict,
    /// `Γ(0) > −∞`: the flow can bring the process to 0 before a jump.
    pub extinction_possible: bool,
}

impl Analysis {
    pub fn classify_boundary(&self) -> Result<BoundaryClass> {
        let beta0 = self.model.beta.at_zero();
        let k0 = self.model.k.at_zero();
        let condition_r = beta0 > 0.0 && k0.is_finite();
        let condition_a = beta0 == 0.0 || k0 == f64::INFINITY;
        let t0_finite = self.t0_finite()?;
        let gamma0_finite = self.gamma_at_zero()?.is_finite();
        Ok(BoundaryClass::from_conditions(condition_r, condition_a, t0_finite, gamma0_finite))
    }

    pub fn classify_regime(&self) -> Result<RegimeReport> {
        let boundary = self.classify_boundary()?;
        let gamma_at_0 = self.gamma_at_zero()?;
        let gamma_at_inf = self.gamma_at_infinity()?;
        let s_at_inf = self.s_at_infinity()?;
        let (pi0, pi_inf) = self.pi_integrability()?;
        let verdict = if gamma_at_inf.is_finite() {
            RegimeVerdict::NoNonconstantScale
        } else if s_at_inf.is_finite() {
            RegimeVerdict::TransientOrExplosive
        } else if boundary.condition_r {
            if pi0 && pi_inf {
                RegimeVerdict::HarrisPositiveRecurrent
            } else {
                RegimeVerdict::HarrisNullRecurrent
            }
        } else if gamma_at_0.is_finite() {
            RegimeVerdict::ExtinctionPossible
        } else {
            RegimeVerdict::Inconclusive
        };
        Ok(RegimeReport {
            gamma_at_0: gamma_at_0.into(),
            gamma_at_inf: gamma_at_inf.into(),
            s_at_inf: s_at_inf.into(),
            pi_integrable_at_0: pi0,
            pi_integrable_at_inf: pi_inf,
            beta_at_0: self.model.beta.at_zero().into(),
            k_at_0: self.model.k.at_zero().into(),
            boundary,
            verdict,
            extinction_possible: gamma_at_0.is_finite(),
        })
    }
}
