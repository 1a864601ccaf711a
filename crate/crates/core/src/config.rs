//! Run configuration, embedded in every artifact for provenance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::labeling::SplittingLaw;
use crate::sampling::TreeModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown model {0:?} (expected uniform, increasing, limit-tree or limit-drawing)")]
    UnknownModel(String),
    #[error("model {0} needs --{1}")]
    Missing(ModelKind, &'static str),
    #[error("model {0} does not take --{1}")]
    Unexpected(ModelKind, &'static str),
    #[error("{0}")]
    Law(String),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("depth {0} exceeds the supported maximum {1}")]
    DepthTooLarge(usize, usize),
}

/// Deepest local-limit tree the command line will build.
pub const MAX_CLI_DEPTH: usize = 60;

/// Default cap on each off-spine Galton-Watson subtree of a limit tree.
pub const CLI_NODE_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Uniform,
    Increasing,
    LimitTree,
    LimitDrawing,
}

impl ModelKind {
    pub fn finite(self) -> Option<TreeModel> {
        match self {
            ModelKind::Uniform => Some(TreeModel::Uniform),
            ModelKind::Increasing => Some(TreeModel::Increasing),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Uniform => "uniform",
            ModelKind::Increasing => "increasing",
            ModelKind::LimitTree => "limit-tree",
            ModelKind::LimitDrawing => "limit-drawing",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ModelKind::Uniform),
            "increasing" => Ok(ModelKind::Increasing),
            "limit-tree" => Ok(ModelKind::LimitTree),
            "limit-drawing" => Ok(ModelKind::LimitDrawing),
            _ => Err(ConfigError::UnknownModel(s.to_string())),
        }
    }
}

/// Everything that determines an artifact. Output paths are kept out of
/// the embedded copy so that the same run written to two places gives two
/// identical files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Provenance of the input file, if it carried one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Value>,
    #[serde(default, skip_serializing)]
    pub outputs: Vec<String>,
}

impl RunConfig {
    pub fn law(&self) -> Result<SplittingLaw, ConfigError> {
        self.law
            .as_deref()
            .unwrap_or("centroid")
            .parse()
            .map_err(|e: crate::labeling::LabelError| ConfigError::Law(e.to_string()))
    }

    /// Check that size parameters fit the model.
    pub fn validate_model(&self) -> Result<ModelKind, ConfigError> {
        let model = self.model.unwrap_or(ModelKind::Uniform);
        self.law()?;
        match model {
            ModelKind::Uniform | ModelKind::Increasing => {
                if self.n.is_none() {
                    return Err(ConfigError::Missing(model, "n"));
                }
                if self.depth.is_some() {
                    return Err(ConfigError::Unexpected(model, "depth"));
                }
            }
            ModelKind::LimitTree | ModelKind::LimitDrawing => {
                let d = self.depth.ok_or(ConfigError::Missing(model, "depth"))?;
                if d > MAX_CLI_DEPTH {
                    return Err(ConfigError::DepthTooLarge(d, MAX_CLI_DEPTH));
                }
                if self.n.is_some() {
                    return Err(ConfigError::Unexpected(model, "n"));
                }
            }
        }
        if self.replicas == Some(0) {
            return Err(ConfigError::NotPositive("replicas"));
        }
        if self.node_cap == Some(0) {
            return Err(ConfigError::NotPositive("node-cap"));
        }
        if self.node_cap.is_some() && model.finite().is_some() {
            return Err(ConfigError::Unexpected(model, "node-cap"));
        }
        Ok(model)
    }

    /// The embedded copy.
    pub fn provenance(&self) -> Value {
        serde_json::to_value(self).expect("configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_omits_outputs() {
        let c = RunConfig {
            command: "sample".into(),
            model: Some(ModelKind::Uniform),
            n: Some(10),
            law: Some("dirichlet:0.5".into()),
            seed: Some(7),
            outputs: vec!["/tmp/a.json".into()],
            ..RunConfig::default()
        };
        let v = c.provenance();
        assert!(v.get("outputs").is_none());
        assert_eq!(v["model"], "uniform");
        let back: RunConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back.outputs, Vec::<String>::new());
        assert_eq!(back.n, Some(10));
    }

    #[test]
    fn model_checks() {
        let mut c = RunConfig {
            command: "sample".into(),
            model: Some(ModelKind::LimitTree),
            depth: Some(5),
            seed: Some(1),
            ..RunConfig::default()
        };
        assert_eq!(c.validate_model(), Ok(ModelKind::LimitTree));
        c.n = Some(3);
        assert!(c.validate_model().is_err());
        c.model = Some(ModelKind::Increasing);
        c.depth = None;
        assert!(c.validate_model().is_ok());
        c.law = Some("dirichlet:-1".into());
        assert!(matches!(c.validate_model(), Err(ConfigError::Law(_))));
        assert!("limit-drawing".parse::<ModelKind>().is_ok());
        assert!("gw".parse::<ModelKind>().is_err());
    }
}
