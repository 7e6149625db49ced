//! Output plumbing: deterministic text writers, SHA-256 content digests,
//! and the per-command run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One produced file, as recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool_version: &'a str,
    command: &'a str,
    /// Unix seconds; informational only, never part of any digest.
    timestamp: u64,
    master_seed: u64,
    config: &'a serde_json::Value,
    outputs: &'a [OutputRecord],
    failures: &'a [String],
}

/// Collects the files a command writes and finishes with the manifest.
pub struct OutputSet {
    dir: PathBuf,
    outputs: Vec<OutputRecord>,
    pub failures: Vec<String>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, String> {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            failures: Vec::new(),
        })
    }

    /// Writes a text artifact and records its digest.
    pub fn write_text(&mut self, name: &str, content: &str) -> Result<PathBuf, String> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.outputs.push(OutputRecord {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(path)
    }

    /// Writes pretty-printed JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, String> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| format!("cannot serialize {name}: {e}"))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Writes `<command>_manifest.json` listing every artifact produced.
    pub fn finish(
        self,
        command: &str,
        master_seed: u64,
        config: &serde_json::Value,
    ) -> Result<(), String> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            master_seed,
            config,
            outputs: &self.outputs,
            failures: &self.failures,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| format!("cannot serialize manifest: {e}"))?;
        text.push('\n');
        let path = self.dir.join(format!("{command}_manifest.json"));
        std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}

/// Shortest round-trip decimal form, locale-independent.
pub fn fmt_f(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt_f(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

pub fn fmt_opt_i(x: Option<i64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
