//! Field files, path manifests and checkpoints.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use gmns_core::integrator::{SimParams, StateRecord, TrajectoryState};
use gmns_core::noise::{PathManifest, WienerPath};
use gmns_core::spectral::{decode_field, encode_field, GalerkinBasis, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub fn write_field(path: &Path, u: &SpectralField) -> AppResult<()> {
    fs::write(path, encode_field(u)).map_err(|e| AppError::io(path, e))
}

pub fn read_field(path: &Path, basis: &Arc<GalerkinBasis>) -> AppResult<SpectralField> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    Ok(decode_field(&bytes, basis)?)
}

pub fn write_manifest(path: &Path, m: &PathManifest) -> AppResult<()> {
    write_json(path, m)
}

pub fn read_manifest(path: &Path) -> AppResult<PathManifest> {
    read_json(path)
}

/// Everything needed to continue a trajectory bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub params: SimParams,
    pub path: PathManifest,
    pub state: StateRecord,
}

impl Checkpoint {
    pub fn new(params: &SimParams, path: &WienerPath, state: &TrajectoryState) -> Self {
        Self { params: params.clone(), path: path.manifest(), state: state.to_record() }
    }

    /// Rebuild the parameters, path and state.
    pub fn restore(&self) -> AppResult<(SimParams, WienerPath, TrajectoryState)> {
        let params = self.params.clone();
        params.validate()?;
        let path = WienerPath::from_manifest(&self.path, params.basis())?;
        let state = TrajectoryState::from_record(&self.state, &path, &params)?;
        Ok((params, path, state))
    }
}

pub fn save_checkpoint(path: &Path, c: &Checkpoint) -> AppResult<()> {
    write_json(path, c)
}

pub fn load_checkpoint(path: &Path) -> AppResult<Checkpoint> {
    read_json(path)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> AppResult<()> {
    let bytes = serde_json::to_vec_pretty(v).map_err(|e| AppError::Format(format!("{}: {e}", path.display())))?;
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| AppError::Format(format!("{}: {e}", path.display())))
}
