//! Structured run reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const TOOL_NAME: &str = "datacopy";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_secs: f64,
    pub threads: usize,
}

/// Everything needed to reproduce a result: configuration, seed and input
/// digests. Timing is kept apart so the rest is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    /// Input name to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub result: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ReportDocument {
    pub fn new<C: Serialize, R: Serialize>(
        command: &str,
        seed: u64,
        config: &C,
        result: &R,
    ) -> Result<Self> {
        Ok(Self {
            tool: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config)?,
            inputs: BTreeMap::new(),
            result: serde_json::to_value(result)?,
            timing: None,
        })
    }

    pub fn with_input(mut self, name: &str, digest: String) -> Self {
        self.inputs.insert(name.to_string(), digest);
        self
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = Some(timing);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// The document without timing.
    pub fn body_json(&self) -> Result<String> {
        Self {
            timing: None,
            ..self.clone()
        }
        .to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
