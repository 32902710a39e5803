//! Time integration of the transformed pathwise system, recovery of u,
//! the cocycle map, energy bookkeeping and structural checks.

mod checks;
mod ledger;
mod params;
mod stepper;

pub use checks::{
    chi_independence_check, chi_independence_series, cocycle_apply, data_continuity_check, doss_sussman_recover,
    doss_sussman_transform, solve_velocity, ChiComparison, ContinuityReport,
};
pub use ledger::{log_mean, EnergyLedger, LedgerRow};
pub use params::{contraction_rate, SimParams, TimeGrid};
pub use stepper::{
    rhs_transformed, solve_from, solve_transformed, solve_transformed_with, step, BoundRow, Explicit, Solution,
    SolveOptions, Stepper, TrajectoryState,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{OuState, WienerPath};
use crate::spectral::SpectralField;

/// Serializable trajectory state for exact resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub step: u64,
    pub time: f64,
    pub v: SpectralField,
    pub z: SpectralField,
    pub z_tick: i64,
}

impl TrajectoryState {
    pub fn to_record(&self) -> StateRecord {
        StateRecord { step: self.step, time: self.time, v: self.v.clone(), z: self.z.z.clone(), z_tick: self.z.tick() }
    }

    pub fn from_record(rec: &StateRecord, path: &WienerPath, params: &SimParams) -> Result<Self> {
        let grid = params.time_grid()?;
        let b = params.basis();
        if rec.v.basis().kmax() != b.kmax() || rec.z.basis().kmax() != b.kmax() {
            return Err(Error::BasisMismatch);
        }
        let t_z = rec.z_tick as f64 * path.dt_path() / grid.sub as f64;
        let z = OuState::new(rec.z.rebase(b)?, t_z, path, params.chi, params.nu, params.ou_scheme, grid.sub)?;
        Ok(Self { step: rec.step, time: rec.time, v: rec.v.rebase(b)?, z })
    }
}
