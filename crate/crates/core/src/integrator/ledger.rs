use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One recorded time of the energy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub h_sq_v: f64,
    pub v_sq_v: f64,
    pub l4_u: f64,
    pub f_n: f64,
    /// ⟨B_N(v + Z), v⟩
    pub work_b: f64,
    /// ⟨f, v⟩
    pub work_f: f64,
    /// χ (Z, v)
    pub work_chi: f64,
    /// ‖v(t)‖² + 2ν∫‖v‖²_V + 2∫⟨B_N(v+Z), v⟩ − ‖v₀‖² − 2∫⟨f, v⟩ − 2χ∫(Z, v)
    pub residual: f64,
    pub h_u: f64,
}

/// Running energy budget of a trajectory.
///
/// The dissipation integral uses the logarithmic mean of |c|² per coefficient
/// over each step, which is exact for the pure exponential decay produced by
/// the integrating factor and second-order accurate otherwise. The remaining
/// integrals use the trapezoidal rule on the solver grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    pub v0_sq: f64,
    /// ∫ 2ν‖v‖²_V so far.
    pub dissipation: f64,
    /// ∫ (2⟨B_N, v⟩ − 2⟨f, v⟩ − 2χ(Z, v)) so far.
    pub work: f64,
    /// Trapezoid minus logarithmic-mean value of the dissipation integral.
    pub quadrature_gap: f64,
}

impl EnergyLedger {
    pub fn last_residual(&self) -> f64 {
        self.rows.last().map(|r| r.residual).unwrap_or(0.0)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }
}

/// (a − b) / ln(a / b), the exact mean of an exponential through a and b.
pub fn log_mean(a: f64, b: f64) -> f64 {
    if !(a > 0.0 && b > 0.0) {
        return 0.0;
    }
    let e = b / a - 1.0;
    if e.abs() < 1e-3 {
        // a (1 + e/2 − e²/12 + e³/24 − 19e⁴/720)
        a * (1.0 + e * (0.5 + e * (-1.0 / 12.0 + e * (1.0 / 24.0 - e * 19.0 / 720.0))))
    } else {
        (a - b) / libm::log(a / b)
    }
}
