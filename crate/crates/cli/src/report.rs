//! The JSON envelope every subcommand prints on standard output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// What a run did: the parameter echo, flat numeric results, and the files
/// written. Both maps are ordered, so identical invocations serialize to
/// identical bytes; nothing time- or host-dependent is recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub version: String,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    /// Every reported number must be a real value; NaN or infinity means a
    /// module produced a degenerate quantity that must not pass as data.
    pub fn check_finite(&self) -> Result<(), String> {
        for (k, v) in &self.metrics {
            if !v.is_finite() {
                return Err(format!("metric {k} is not a finite number ({v})"));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
