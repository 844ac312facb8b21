//! Run manifests: everything needed to repeat a run.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Every flag as given or defaulted.
    pub flags: BTreeMap<String, String>,
    /// Input path → SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub pool_sizes: BTreeMap<String, usize>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            ..Default::default()
        }
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) {
        self.flags.insert(name.into(), value.to_string());
    }

    pub fn fingerprint(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    /// Writes `manifest.toml`, plus `timing.toml` kept apart so that every
    /// other artifact is reproducible byte for byte.
    pub fn write(&self, out: &Path, elapsed: Duration) -> anyhow::Result<()> {
        let text = toml::to_string(self).context("serializing manifest")?;
        fs::write(out.join("manifest.toml"), text)?;
        fs::write(
            out.join("timing.toml"),
            format!("elapsed_seconds = {:.3}\n", elapsed.as_secs_f64()),
        )?;
        Ok(())
    }
}
