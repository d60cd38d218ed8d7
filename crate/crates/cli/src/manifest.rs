use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub wall_seconds: f64,
    pub files: Vec<FileEntry>,
}

/// Output directory that remembers every file written through it.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
    started: Instant,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new(), started: Instant::now() })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, rel: &str) {
        self.written.push(PathBuf::from(rel));
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&p, bytes)?;
        self.record(rel);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<()> {
        let s = serde_json::to_string_pretty(value)?;
        self.write(rel, s.as_bytes())
    }

    /// Hashes every recorded file and writes the manifest.
    pub fn finish<C: Serialize>(self, subcommand: &str, config: &C) -> CliResult<RunManifest> {
        let mut files = Vec::with_capacity(self.written.len());
        for rel in &self.written {
            let data = fs::read(self.root.join(rel))?;
            files.push(FileEntry {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes: data.len() as u64,
                sha256: format!("{:x}", Sha256::digest(&data)),
            });
        }
        let manifest = RunManifest {
            subcommand: subcommand.into(),
            config: serde_json::to_value(config)?,
            tool_version: msqg::evolution::provenance(),
            wall_seconds: self.started.elapsed().as_secs_f64(),
            files,
        };
        fs::write(self.root.join(MANIFEST_NAME), serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}
