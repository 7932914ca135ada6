//! Model registry: names plus parameter maps, serializable for configs.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::model::{self, ManifoldModel};
use crate::error::ManifoldError;
use crate::num::Real;

/// A model reference as it appears in configs: `"torus"` or
/// `"ellipsoid{a:1,b:1,c:2}"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

pub const MODEL_NAMES: [&str; 5] = ["plane", "torus", "sphere", "cylinder", "ellipsoid"];

impl ModelSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    /// Parse `name` or `name{k:v,k:v}`.
    pub fn parse(text: &str) -> Result<Self, ManifoldError> {
        let text = text.trim();
        let Some(open) = text.find('{') else {
            return Ok(Self::new(text));
        };
        if !text.ends_with('}') {
            return Err(ManifoldError::BadParameter(format!(
                "unbalanced braces in model spec `{text}`"
            )));
        }
        let name = text[..open].trim().to_string();
        let body = &text[open + 1..text.len() - 1];
        let mut params = BTreeMap::new();
        for part in body.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = part.split_once(':').ok_or_else(|| {
                ManifoldError::BadParameter(format!("expected key:value, got `{part}`"))
            })?;
            let value: f64 = v.trim().parse().map_err(|_| {
                ManifoldError::BadParameter(format!("bad numeric value `{}`", v.trim()))
            })?;
            params.insert(k.trim().to_string(), value);
        }
        Ok(Self { name, params })
    }

    pub fn build<T: Real>(&self) -> Result<ManifoldModel<T>, ManifoldError> {
        let mut model = match self.name.as_str() {
            "plane" => model::plane(),
            "torus" => model::torus(),
            "sphere" => model::sphere(),
            "cylinder" => model::cylinder(),
            "ellipsoid" => {
                let a = self.params.get("a").copied().unwrap_or(1.0);
                let b = self.params.get("b").copied().unwrap_or(a);
                let c = self.params.get("c").copied().unwrap_or(2.0);
                if (a - b).abs() > 1e-15 {
                    return Err(ManifoldError::BadParameter(
                        "only ellipsoids of revolution are shipped (need a = b)".into(),
                    ));
                }
                model::ellipsoid(a, c)?
            }
            other => return Err(ManifoldError::UnknownModel(other.to_string())),
        };
        model.params = self.params.clone();
        Ok(model)
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.params.is_empty() {
            write!(f, "{}", self.name)
        } else {
            let body: Vec<String> = self
                .params
                .iter()
                .map(|(k, v)| format!("{k}:{v}"))
                .collect();
            write!(f, "{}{{{}}}", self.name, body.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let spec = ModelSpec::parse("ellipsoid{a:1,b:1,c:2}").unwrap();
        assert_eq!(spec.name, "ellipsoid");
        assert_eq!(spec.params["c"], 2.0);
        let built = spec.build::<f64>().unwrap();
        assert_eq!(built.name, "ellipsoid");
        let again = ModelSpec::parse(&spec.to_string()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn unknown_model_is_an_error() {
        let spec = ModelSpec::new("klein-bottle");
        assert!(spec.build::<f64>().is_err());
    }

    #[test]
    fn all_registry_names_build() {
        for name in MODEL_NAMES {
            ModelSpec::new(name).build::<f64>().unwrap();
        }
    }
}
