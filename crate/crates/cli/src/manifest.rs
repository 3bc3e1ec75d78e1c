use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use crate::files::{write_text, SCHEMA_VERSION};

/// Reproducibility record written next to every run's outputs. Only
/// `started_unix_seconds` and `wall_clock_seconds` vary between identical
/// runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    /// Flags given explicitly on the command line.
    pub overrides: BTreeMap<String, Value>,
    /// Effective settings after defaults, files and flags are merged.
    pub config: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
}

/// Collects manifest fields while a command runs.
pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64());
        Self {
            manifest: RunManifest {
                command: command.into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                schema_version: SCHEMA_VERSION,
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
                overrides: BTreeMap::new(),
                config: BTreeMap::new(),
                seed: None,
                started_unix_seconds: now,
                wall_clock_seconds: 0.0,
            },
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, name: &str, path: Option<&Path>) -> &mut Self {
        let shown = path.map_or_else(|| "<bundled>".into(), |p| p.display().to_string());
        self.manifest.inputs.insert(name.into(), shown);
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.manifest.outputs.push(path.display().to_string());
        self
    }

    pub fn override_flag(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.manifest.overrides.insert(
            name.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn config(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.manifest.config.insert(
            name.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.manifest.seed = Some(seed);
        self
    }

    /// Stamps the duration and writes the manifest to `path`.
    pub fn finish(mut self, path: &Path) -> Result<RunManifest> {
        self.manifest.outputs.sort();
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        write_text(
            path,
            &(serde_json::to_string_pretty(&self.manifest)? + "\n"),
        )?;
        Ok(self.manifest)
    }
}

/// `<dir>/manifest.json`.
pub fn dir_manifest(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

/// `report.tsv` -> `report.manifest.json`, beside the file.
pub fn file_manifest(file: &Path) -> PathBuf {
    let stem = file.file_stem().unwrap_or_default().to_string_lossy();
    file.with_file_name(format!("{stem}.manifest.json"))
}
