//! Append-only JSONL run registry.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub experiment: String,
    pub seed: u64,
    pub out_dir: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// SHA-256 over all output files.
    pub content_hash: String,
    pub outputs: BTreeMap<String, String>,
    pub pass: bool,
    pub exit_code: i32,
    /// Earlier records with the same config hash but different outputs.
    pub diverged_from: Vec<String>,
}

/// One registry file; appends go through a single lock.
#[derive(Debug)]
pub struct Registry {
    path: PathBuf,
    lock: Mutex<()>,
}

impl Registry {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into(), lock: Mutex::new(()) }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> AppResult<Vec<RunRecord>> {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(AppError::io(&self.path, e)),
        };
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| AppError::Format(format!("{}: {e}", self.path.display()))))
            .collect()
    }

    /// Content hashes of earlier runs of `config_hash` that differ from `content_hash`.
    pub fn divergences(&self, config_hash: &str, content_hash: &str) -> AppResult<Vec<String>> {
        let mut out: Vec<String> = self
            .records()?
            .into_iter()
            .filter(|r| r.config_hash == config_hash && r.content_hash != content_hash)
            .map(|r| r.content_hash)
            .collect();
        out.dedup();
        Ok(out)
    }

    pub fn append(&self, rec: &RunRecord) -> AppResult<()> {
        let _guard = self.lock.lock().expect("registry lock");
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
            }
        }
        let mut line = serde_json::to_string(rec).map_err(|e| AppError::Format(e.to_string()))?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path).map_err(|e| AppError::io(&self.path, e))?;
        f.write_all(line.as_bytes()).map_err(|e| AppError::io(&self.path, e))
    }
}
