use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the resolved `spec` table.
    pub spec_hash: String,
    pub outputs: Vec<String>,
    /// Headline numbers (RMSE, iterations, selected weights); never timings.
    pub results: toml::Table,
    pub spec: toml::Table,
}

impl Manifest {
    pub fn new<S: Serialize>(command: &str, seed: u64, spec: &S) -> Result<Self> {
        let spec = toml::Table::try_from(spec).context("serializing run spec")?;
        Ok(Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            spec_hash: spec_hash(&spec)?,
            outputs: Vec::new(),
            results: toml::Table::new(),
            spec,
        })
    }

    pub fn result(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.toml");
        std::fs::write(&path, toml::to_string(self)?).with_context(|| format!("writing {}", path.display()))
    }

    #[cfg(test)]
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn spec_hash(spec: &toml::Table) -> Result<String> {
    let text = toml::to_string(spec)?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
