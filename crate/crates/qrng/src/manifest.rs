//! Run manifests: what a command wrote, with content hashes and the hash of
//! the configuration that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};
use crate::format;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the compact JSON form of `config`. Struct fields serialize in
/// declaration order, so equal configurations hash equally.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config).map_err(|e| AppError::Unexpected(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

/// Collects files written into one output directory.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        format::write_file(&path, bytes)?;
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, format::to_json(value)?.as_bytes())
    }

    pub fn outputs(&self) -> &[OutputEntry] {
        &self.outputs
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(self, command: &str, config_hash: String, seed: u64) -> Result<Manifest> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            seed,
            outputs: self.outputs,
        };
        format::write_file(
            &self.dir.join(FILE_NAME),
            format::to_json(&manifest)?.as_bytes(),
        )?;
        Ok(manifest)
    }
}
