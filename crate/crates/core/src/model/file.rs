//! JSON model files: `{"alpha": F, "beta": F, "k": F}` where each `F` is
//! `{"expr": "..."}` or `{"family": "...", "params": {...}}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelError, ModelTriple, ParamFamily, RateFunction, SurvivalFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FunctionSpec {
    Expr { expr: String },
    Family { family: String, params: BTreeMap<String, f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alpha: FunctionSpec,
    pub beta: FunctionSpec,
    pub k: FunctionSpec,
}

fn build(slot: &'static str, spec: &FunctionSpec) -> Result<RateFunction, ModelError> {
    match spec {
        FunctionSpec::Expr { expr } => RateFunction::from_expr(expr).map_err(|source| ModelError::Parse { slot, source }),
        FunctionSpec::Family { family, params } => Ok(ParamFamily::from_map(family, params.clone())?.rate()),
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::File(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn to_model(&self) -> Result<ModelTriple, ModelError> {
        Ok(ModelTriple::new(
            build("alpha", &self.alpha)?,
            build("beta", &self.beta)?,
            SurvivalFunction::new(build("k", &self.k)?),
        ))
    }
}

impl ModelTriple {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        ModelFile::parse(text)?.to_model()
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        ModelFile::load(path)?.to_model()
    }
}
