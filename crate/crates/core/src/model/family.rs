//! Named parametric families.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::function::{RateFunction, Repr, Source, SurvivalFunction};
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Power,
    Linear,
    Constant,
    ExponentialSurvival,
    ParetoSurvival,
    WeibullSurvival,
}

impl FamilyName {
    pub fn parse(name: &str) -> Result<Self, ModelError> {
        Ok(match name {
            "power" => Self::Power,
            "linear" => Self::Linear,
            "constant" => Self::Constant,
            "exponential-survival" => Self::ExponentialSurvival,
            "pareto-survival" => Self::ParetoSurvival,
            "weibull-survival" => Self::WeibullSurvival,
            other => return Err(ModelError::UnknownFamily(other.to_string())),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Power => "power",
            Self::Linear => "linear",
            Self::Constant => "constant",
            Self::ExponentialSurvival => "exponential-survival",
            Self::ParetoSurvival => "pareto-survival",
            Self::WeibullSurvival => "weibull-survival",
        }
    }

    fn param_names(self) -> &'static [&'static str] {
        match self {
            Self::Power => &["coef", "exponent"],
            Self::Linear => &["intercept", "slope"],
            Self::Constant => &["value"],
            Self::ExponentialSurvival => &["theta"],
            Self::ParetoSurvival => &["c"],
            Self::WeibullSurvival => &["kappa", "eta"],
        }
    }

    pub fn is_survival(self) -> bool {
        matches!(self, Self::ExponentialSurvival | Self::ParetoSurvival | Self::WeibullSurvival)
    }
}

/// Family name plus parameters, e.g. `power{coef=1, exponent=2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamFamily {
    pub name: FamilyName,
    pub params: BTreeMap<String, f64>,
}

impl fmt::Display for ParamFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name.as_str())?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

impl ParamFamily {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Result<Self, ModelError> {
        let name = FamilyName::parse(name)?;
        let params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let fam = Self { name, params };
        fam.check()?;
        Ok(fam)
    }

    pub fn from_map(name: &str, params: BTreeMap<String, f64>) -> Result<Self, ModelError> {
        let fam = Self { name: FamilyName::parse(name)?, params };
        fam.check()?;
        Ok(fam)
    }

    fn get(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or(f64::NAN)
    }

    fn check(&self) -> Result<(), ModelError> {
        let expected = self.name.param_names();
        for key in self.params.keys() {
            if !expected.contains(&key.as_str()) {
                return Err(ModelError::InvalidParameter {
                    family: self.name.as_str(),
                    param: key.clone(),
                    reason: format!("unknown parameter (expected {})", expected.join(", ")),
                });
            }
        }
        for key in expected {
            let v = self.get(key);
            if !self.params.contains_key(*key) || !v.is_finite() {
                return Err(ModelError::InvalidParameter {
                    family: self.name.as_str(),
                    param: key.to_string(),
                    reason: "missing or non-finite".into(),
                });
            }
        }
        let positive: &[&str] = match self.name {
            FamilyName::Power => &["coef"],
            FamilyName::Linear => &[],
            FamilyName::Constant => &["value"],
            FamilyName::ExponentialSurvival => &["theta"],
            FamilyName::ParetoSurvival => &["c"],
            FamilyName::WeibullSurvival => &["kappa", "eta"],
        };
        for key in positive {
            if self.get(key) <= 0.0 {
                return Err(ModelError::InvalidParameter {
                    family: self.name.as_str(),
                    param: key.to_string(),
                    reason: format!("must be positive, got {}", self.get(key)),
                });
            }
        }
        if self.name == FamilyName::Linear {
            let (a, b) = (self.get("intercept"), self.get("slope"));
            if a < 0.0 || b < 0.0 || a + b <= 0.0 {
                return Err(ModelError::InvalidParameter {
                    family: "linear",
                    param: "intercept/slope".into(),
                    reason: format!("need intercept ≥ 0, slope ≥ 0, not both zero; got {a}, {b}"),
                });
            }
        }
        Ok(())
    }

    fn repr(&self) -> Repr {
        match self.name {
            FamilyName::Power => Repr::Power { coef: self.get("coef"), exponent: self.get("exponent") },
            FamilyName::Linear => Repr::Affine { intercept: self.get("intercept"), slope: self.get("slope") },
            FamilyName::Constant => Repr::Power { coef: self.get("value"), exponent: 0.0 },
            FamilyName::ExponentialSurvival => Repr::ExpSurvival { theta: self.get("theta") },
            FamilyName::ParetoSurvival => Repr::Pareto { c: self.get("c") },
            FamilyName::WeibullSurvival => Repr::Weibull { kappa: self.get("kappa"), eta: self.get("eta") },
        }
    }

    pub fn rate(&self) -> RateFunction {
        RateFunction::from_repr(Source::Family(self.clone()), self.repr())
    }

    pub fn survival(&self) -> SurvivalFunction {
        SurvivalFunction::new(self.rate())
    }
}

/// Result of [`make_family`]: survival families yield a [`SurvivalFunction`].
#[derive(Debug, Clone)]
pub enum FamilyFunction {
    Rate(RateFunction),
    Survival(SurvivalFunction),
}

impl FamilyFunction {
    pub fn into_rate(self) -> RateFunction {
        match self {
            Self::Rate(r) => r,
            Self::Survival(s) => s.as_rate().clone(),
        }
    }

    pub fn into_survival(self) -> SurvivalFunction {
        match self {
            Self::Rate(r) => SurvivalFunction::new(r),
            Self::Survival(s) => s,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            Self::Rate(r) => r.evaluate(x),
            Self::Survival(s) => s.evaluate(x),
        }
    }
}

pub fn make_family(descriptor: &ParamFamily) -> FamilyFunction {
    if descriptor.name.is_survival() {
        FamilyFunction::Survival(descriptor.survival())
    } else {
        FamilyFunction::Rate(descriptor.rate())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn examples() {
        let exp = make_family(&ParamFamily::new("exponential-survival", &[("theta", 1.0)]).unwrap());
        assert_relative_eq!(exp.evaluate(2.0), 0.1353352832366127, max_relative = 1e-15);
        let pareto = make_family(&ParamFamily::new("pareto-survival", &[("c", 2.0)]).unwrap());
        assert_eq!(pareto.evaluate(1.0), 0.25);
        let power = make_family(&ParamFamily::new("power", &[("coef", 1.0), ("exponent", 2.0)]).unwrap());
        assert_eq!(power.evaluate(3.0), 9.0);
        assert!(matches!(pareto, FamilyFunction::Survival(_)));
        assert!(matches!(power, FamilyFunction::Rate(_)));
    }

    #[test]
    fn closed_inverse_registered() {
        let k = ParamFamily::new("exponential-survival", &[("theta", 2.0)]).unwrap().survival();
        assert_relative_eq!(k.closed_inverse((-4.0f64).exp()).unwrap(), 2.0, max_relative = 1e-15);
        let w = ParamFamily::new("weibull-survival", &[("kappa", 1.5), ("eta", 0.7)]).unwrap().survival();
        let y = w.closed_inverse(0.3).unwrap();
        assert_relative_eq!(w.evaluate(y), 0.3, max_relative = 1e-13);
    }

    #[test]
    fn errors() {
        assert!(matches!(ParamFamily::new("gamma", &[]), Err(ModelError::UnknownFamily(_))));
        assert!(matches!(
            ParamFamily::new("exponential-survival", &[("theta", 0.0)]),
            Err(ModelError::InvalidParameter { .. })
        ));
        assert!(ParamFamily::new("power", &[("coef", 1.0)]).is_err());
        assert!(ParamFamily::new("constant", &[("value", 1.0), ("extra", 2.0)]).is_err());
        assert!(ParamFamily::new("linear", &[("intercept", 0.0), ("slope", 0.0)]).is_err());
    }
}
