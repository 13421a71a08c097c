//! Run manifests: a JSON sidecar written next to every primary output so a
//! run can be reproduced exactly (configuration hash + seed + tool version).

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Version of this tool (crate version).
    pub tool_version: String,
    /// Which subcommand produced the outputs.
    pub subcommand: String,
    /// SHA-256 over the canonical parameter text — stable across platforms.
    pub config_hash: String,
    /// RNG seed, for subcommands that consume one.
    pub seed: Option<u64>,
    /// Input files consumed.
    pub inputs: Vec<String>,
    /// Output files written (manifest excluded).
    pub outputs: Vec<String>,
    /// Wall-clock duration of the run.
    pub duration_seconds: f64,
}

/// Collects manifest fields while a subcommand runs.
pub struct ManifestBuilder {
    subcommand: &'static str,
    config_hash: String,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &'static str, config_hash: String) -> ManifestBuilder {
        ManifestBuilder {
            subcommand,
            config_hash,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Serialize as single-line JSON and write to `<primary>.manifest.json`.
    pub fn write(self, primary: &Path) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: self.subcommand.to_string(),
            config_hash: self.config_hash,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = manifest_path(primary);
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Manifest path for a given primary output path.
pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

/// Hash arbitrary canonical parameter text (used by subcommands that do not
/// take a full config file).
pub fn hash_text(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
