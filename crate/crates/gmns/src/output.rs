//! CSV and JSON emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| fmt_f64(*x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Collects the files of one run directory and their content hashes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> AppResult<Self> {
        fs::create_dir_all(root).map_err(|e| AppError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), hashes: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> AppResult<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| AppError::io(&path, e))?;
        self.hashes.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> AppResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| AppError::Format(format!("{name}: {e}"));
        w.write_record(&table.header).map_err(fail)?;
        for r in &table.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| AppError::Format(format!("{name}: {e}")))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> AppResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| AppError::Format(format!("{name}: {e}")))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Per-file SHA-256, keyed by file name.
    pub fn hashes(&self) -> &BTreeMap<String, String> {
        &self.hashes
    }

    /// SHA-256 over the sorted (name, hash) list.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.hashes {
            h.update(k.as_bytes());
            h.update([0]);
            h.update(v.as_bytes());
            h.update([b'\n']);
        }
        hex::encode(h.finalize())
    }
}
