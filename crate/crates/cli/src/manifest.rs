use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::AppConfig;

#[derive(Debug, Serialize)]
pub struct FileRef {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

impl FileRef {
    /// Hashes regular files; directories and missing paths are listed bare.
    pub fn new(path: &Path) -> Self {
        let sha256 = std::fs::read(path).ok().map(|bytes| {
            Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
        });
        Self { path: path.display().to_string(), sha256 }
    }
}

/// What a command ran with and what it produced.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub tool_version: String,
    pub seed: u64,
    pub config: AppConfig,
    pub inputs: Vec<FileRef>,
    pub outputs: Vec<FileRef>,
    pub started_unix_ms: u128,
    pub wall_clock_ms: u128,
    pub counts: BTreeMap<String, u64>,
}

pub struct Recorder {
    command: String,
    started: Instant,
    started_unix_ms: u128,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    counts: BTreeMap<String, u64>,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            started: Instant::now(),
            started_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            inputs: Vec::new(),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Records the output the manifest is named after.
    pub fn primary(&mut self, path: &Path) {
        self.outputs.insert(0, path.to_path_buf());
    }

    pub fn count(&mut self, key: &str, value: usize) {
        self.counts.insert(key.to_string(), value as u64);
    }

    pub fn primary_output(&self) -> Option<&Path> {
        self.outputs.first().map(PathBuf::as_path)
    }

    pub fn finish(self, config: &AppConfig, seed: u64) -> RunManifest {
        RunManifest {
            command: self.command,
            argv: std::env::args().collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: config.clone(),
            inputs: self.inputs.iter().map(|p| FileRef::new(p)).collect(),
            outputs: self.outputs.iter().map(|p| FileRef::new(p)).collect(),
            started_unix_ms: self.started_unix_ms,
            wall_clock_ms: self.started.elapsed().as_millis(),
            counts: self.counts,
        }
    }
}

/// Writes the manifest to `explicit`, else next to the primary output as
/// `<output>.manifest.json`, else to stderr.
pub fn emit(manifest: &RunManifest, explicit: Option<&Path>, primary: Option<&Path>) -> Result<()> {
    let target = explicit.map(Path::to_path_buf).or_else(|| {
        primary.map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match target {
        Some(path) => {
            let text = serde_json::to_string_pretty(manifest)?;
            crate::io::write_atomic(&path, format!("{text}\n").as_bytes())?
        }
        None => eprintln!("{}", serde_json::to_string(manifest)?),
    }
    Ok(())
}
