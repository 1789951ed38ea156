//! Run artifacts, the manifest that fingerprints them, and replay checks.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_SNAPSHOT: &str = "config.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub library_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config_sha256: String,
    /// Files that reproduce bit-exactly from the config snapshot.
    pub artifacts: Vec<ArtifactEntry>,
    /// Files with wall-clock measurements, excluded from replay checks.
    pub timing_files: Vec<String>,
}

/// Files produced by one command, held in memory until written.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    timing: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_timing(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.timing.push((name.into(), contents.into()));
    }

    pub fn manifest(&self, command: &str, seed: Option<u64>, config_toml: &str) -> Manifest {
        Manifest {
            tool: "heckfa".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            library_version: heckfa::VERSION.into(),
            command: command.into(),
            seed,
            config_sha256: sha256_hex(config_toml.as_bytes()),
            artifacts: self
                .files
                .iter()
                .map(|(name, bytes)| ArtifactEntry {
                    file: name.clone(),
                    sha256: sha256_hex(bytes),
                })
                .collect(),
            timing_files: self.timing.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    /// Writes the config snapshot, every artifact, and the manifest last.
    pub fn write(&self, dir: &Path, manifest: &Manifest, config_toml: &str) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        write_file(&dir.join(CONFIG_SNAPSHOT), config_toml.as_bytes())?;
        for (name, bytes) in self.files.iter().chain(&self.timing) {
            write_file(&dir.join(name), bytes)?;
        }
        let mut json = serde_json::to_string_pretty(manifest)
            .map_err(|e| CliError::Core(heckfa::Error::Serialization(e.to_string())))?;
        json.push('\n');
        write_file(&dir.join(MANIFEST), json.as_bytes())
    }
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(heckfa::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| io(path, e))
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Core(heckfa::Error::Serialization(format!("{}: {e}", path.display()))))
}

pub fn read_snapshot(dir: &Path) -> CliResult<(PathBuf, String)> {
    let path = dir.join(CONFIG_SNAPSHOT);
    let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    Ok((path, text))
}

/// Names of recorded artifacts whose hashes differ from `fresh`.
pub fn compare(recorded: &Manifest, fresh: &Manifest) -> Vec<String> {
    let mut diffs = Vec::new();
    if recorded.config_sha256 != fresh.config_sha256 {
        diffs.push(CONFIG_SNAPSHOT.to_string());
    }
    for entry in &recorded.artifacts {
        match fresh.artifacts.iter().find(|f| f.file == entry.file) {
            Some(f) if f.sha256 == entry.sha256 => {}
            _ => diffs.push(entry.file.clone()),
        }
    }
    for entry in &fresh.artifacts {
        if !recorded.artifacts.iter().any(|r| r.file == entry.file) {
            diffs.push(entry.file.clone());
        }
    }
    diffs
}
