//! Cause/effect/target assignment of CSV columns.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which CSV columns are causes, effects and the binary target.
///
/// Unknown keys in the JSON file are ignored, so a `generate` sidecar can be
/// passed straight back as a partition file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub cause_columns: Vec<String>,
    pub effect_columns: Vec<String>,
    pub target_column: String,
    /// Target value mapped to `Y = 1`.
    pub positive_label: String,
}

impl PartitionConfig {
    /// Effects must be non-empty and no column may play two roles.
    pub fn validate(&self) -> Result<(), String> {
        if self.effect_columns.is_empty() {
            return Err("at least one effect column is required".into());
        }
        let mut seen = HashSet::new();
        for c in self.cause_columns.iter().chain(&self.effect_columns).chain([&self.target_column]) {
            if !seen.insert(c.as_str()) {
                return Err(format!("column {c:?} is assigned more than one role"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: PartitionConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid partition file: {e}")))?;
        cfg.validate().map_err(CliError::Config)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read partition file {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
