//! Experiment configuration files: seed, budgets and constant overrides.

use crate::error::{malformed, CliResult};
use isoslice::Constants;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub directions: Option<usize>,
    #[serde(default)]
    pub constants: Constants,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| malformed(format!("config: line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"seed": 3, "sample": 10}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"constants": {"c_beta": 1}}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"seed": 3, "constants": {"c_prime": 2}}"#).unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.constants.c_prime, 2.0);
        assert_eq!(c.constants.c_alpha, Constants::default().c_alpha);
    }
}
