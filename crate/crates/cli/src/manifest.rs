//! Run manifests: what went in, what came out, and when.

use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: Vec<String>,
    /// SHA-256 over every input, in order, each prefixed by its name.
    pub config_hash: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
}

/// One named input blob. Built-in scenarios and effective options count as
/// inputs even though they are not files on disk.
pub struct Input {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Input {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self { name: name.into(), bytes: bytes.into() }
    }
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(inputs: &[Input]) -> String {
    let mut h = Sha256::new();
    for i in inputs {
        h.update((i.name.len() as u64).to_le_bytes());
        h.update(i.name.as_bytes());
        h.update((i.bytes.len() as u64).to_le_bytes());
        h.update(&i.bytes);
    }
    hex(&h.finalize())
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Records a finished run in `dir`, hashing every file written there.
pub struct Recorder {
    dir: PathBuf,
    started: DateTime<Utc>,
    seed: u64,
    inputs: Vec<Input>,
}

impl Recorder {
    pub fn new(dir: &Path, seed: u64, inputs: Vec<Input>) -> Self {
        Self { dir: dir.to_path_buf(), started: Utc::now(), seed, inputs }
    }

    pub fn finish(self) -> anyhow::Result<RunManifest> {
        let mut outputs = Vec::new();
        collect(&self.dir, &self.dir, &mut outputs)?;
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let inputs = self
            .inputs
            .iter()
            .map(|i| FileEntry { path: i.name.clone(), sha256: hex(&Sha256::digest(&i.bytes)), bytes: i.bytes.len() as u64 })
            .collect();
        let manifest = RunManifest {
            tool: env!("CARGO_BIN_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: std::env::args().collect(),
            config_hash: config_hash(&self.inputs),
            seed: self.seed,
            started: timestamp(self.started),
            finished: timestamp(Utc::now()),
            inputs,
            outputs,
        };
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<FileEntry>) -> anyhow::Result<()> {
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else if path.file_name().is_some_and(|n| n != MANIFEST_FILE) {
            let bytes = std::fs::read(&path)?;
            let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            out.push(FileEntry { path: rel, sha256: hex(&Sha256::digest(&bytes)), bytes: bytes.len() as u64 });
        }
    }
    Ok(())
}

/// `out/<id>/<timestamp>/`, suffixed if a run in the same millisecond exists.
pub fn run_dir(out: &Path, id: &str) -> anyhow::Result<PathBuf> {
    let stamp = Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let base = out.join(id);
    let mut dir = base.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{k}"));
        k += 1;
    }
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_covers_names_and_contents() {
        let a = config_hash(&[Input::new("a", "xy"), Input::new("b", "z")]);
        assert_eq!(a.len(), 64);
        assert_ne!(a, config_hash(&[Input::new("a", "x"), Input::new("b", "yz")]));
        assert_ne!(a, config_hash(&[Input::new("a", "xy"), Input::new("c", "z")]));
        assert_eq!(a, config_hash(&[Input::new("a", "xy"), Input::new("b", "z")]));
    }
}
