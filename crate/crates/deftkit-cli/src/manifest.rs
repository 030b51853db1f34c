//! Run manifests: every command leaves a `manifest.json` beside its outputs
//! describing exactly how to reproduce them.
//!
//! The manifest embeds the fully-resolved settings (after config-file and
//! flag merging) plus a hash of them, the seed when randomness is involved,
//! and command-specific details. Two runs with the same settings and seed
//! produce manifests identical except for the `created` timestamp.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{write_failed, CliResult};

/// The reproducibility record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    /// Which subcommand produced this directory.
    pub command: String,
    /// RFC 3339 creation time — the only field allowed to differ between
    /// identical runs.
    pub created: String,
    /// `sha256:<hex>` over the canonical JSON of `settings`.
    pub config_hash: String,
    /// RNG seed, for commands that use one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// The fully-resolved settings the run actually used.
    pub settings: serde_json::Value,
    /// Input files/directories read.
    pub inputs: Vec<String>,
    /// Output files written (relative to the manifest's directory).
    pub outputs: Vec<String>,
    /// Command-specific facts: counts, distributions, diagnostics.
    pub details: serde_json::Value,
}

impl Manifest {
    /// Build a manifest for `command` from its resolved settings.
    pub fn new(command: &str, settings: &impl Serialize) -> Self {
        let settings = serde_json::to_value(settings).expect("settings serialize to JSON");
        Manifest {
            command: command.to_string(),
            created: chrono::Utc::now().to_rfc3339(),
            config_hash: config_hash(&settings),
            seed: None,
            settings,
            inputs: Vec::new(),
            outputs: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, name: &str) -> Self {
        self.outputs.push(name.to_string());
        self
    }

    pub fn details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).expect("details serialize to JSON");
        self
    }

    /// Write `manifest.json` into `out_dir`.
    pub fn write(&self, out_dir: &Path) -> CliResult<PathBuf> {
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| write_failed(&path, e))?;
        Ok(path)
    }
}

/// Content hash of the resolved settings, stable across runs and platforms.
fn config_hash(settings: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(settings).expect("settings serialize to JSON");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(7 + 64);
    hex.push_str("sha256:");
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Create the output directory (and parents) if needed.
pub fn ensure_out_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| write_failed(path, e))
}

/// Write a named output file into the out directory.
pub fn write_output(out_dir: &Path, name: &str, content: &str) -> CliResult<PathBuf> {
    let path = out_dir.join(name);
    fs::write(&path, content).map_err(|e| write_failed(&path, e))?;
    Ok(path)
}
