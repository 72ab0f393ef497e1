use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub experiment_id: String,
    pub subcommand: String,
    /// SHA-256 of the canonical config document, hex encoded.
    pub config_sha256: String,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(experiment_id: &str, subcommand: &str, canonical_config: &str, master_seed: Option<u64>) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            subcommand: subcommand.to_string(),
            config_sha256: config_hash(canonical_config),
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            outputs: Vec::new(),
        }
    }
}

pub fn config_hash(canonical_config: &str) -> String {
    Sha256::digest(canonical_config.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
