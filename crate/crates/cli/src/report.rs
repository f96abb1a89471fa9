use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: ToolInfo = ToolInfo { name: "chaining", version: env!("CARGO_PKG_VERSION") };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seeds {
    pub master_seed: u64,
    pub stream_id: u64,
    /// Seeds of generated index sets, by role.
    pub index_set_seeds: Vec<(String, u64)>,
}

/// Everything a run produces, with no timestamps or host data, so identical configs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub experiment: &'static str,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seeds: Seeds,
    pub grids: serde_json::Value,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub result: serde_json::Value,
    pub tables: Vec<String>,
}

/// The config as embedded and hashed: the output directory is not part of an experiment's identity.
pub fn canonical_config(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.output.dir = None;
    c
}

/// SHA-256 of the canonical config's compact JSON.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(&canonical_config(cfg)).expect("configs serialize");
    hex::encode(Sha256::digest(&bytes))
}

impl ReportDocument {
    pub fn new(
        cfg: &ExperimentConfig,
        seeds: Seeds,
        grids: serde_json::Value,
        checks: Vec<Check>,
        result: serde_json::Value,
        tables: Vec<String>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL,
            experiment: cfg.experiment.name(),
            config_hash: config_hash(cfg),
            config: canonical_config(cfg),
            seeds,
            grids,
            pass: checks.iter().all(|c| c.pass),
            checks,
            result,
            tables,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
