use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ledger::{log_mean, EnergyLedger, LedgerRow};
use super::params::{SimParams, TimeGrid};
use crate::error::{Error, Result};
use crate::noise::{OuState, WienerPath};
use crate::operators::b_n_with_norm;
use crate::spectral::SpectralField;

/// Pathwise state: transformed velocity v and the OU coordinates Z, with u = v + Z.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub step: u64,
    pub time: f64,
    pub v: SpectralField,
    pub z: OuState,
}

impl TrajectoryState {
    /// Start at path time 0 from velocity `x`, with Z stationary at interval 0.
    pub fn from_velocity(x: &SpectralField, path: &WienerPath, params: &SimParams) -> Result<Self> {
        let grid = params.time_grid()?;
        let z = OuState::stationary(params.basis(), path, params.chi, params.nu, params.ou_scheme, grid.sub, 0)?;
        let v = x - &z.z;
        Ok(Self { step: 0, time: 0.0, v, z })
    }

    /// u = v + Z.
    pub fn u(&self) -> SpectralField {
        &self.v + &self.z.z
    }
}

/// Explicit part −B_N(v + Z) + χZ + f at one state, with its diagnostics.
#[derive(Debug, Clone)]
pub struct Explicit {
    pub value: SpectralField,
    pub b_n: SpectralField,
    pub l4_u: f64,
    pub f_n: f64,
}

pub(crate) fn explicit_part(v: &SpectralField, z: &SpectralField, params: &SimParams) -> Result<Explicit> {
    let u = v + z;
    let (b_n, l4_u, f_n) = b_n_with_norm(&u, params.n())?;
    let mut value = params.forcing.clone();
    value.axpy(-1.0, &b_n);
    if params.chi != 0.0 {
        value.axpy(params.chi, z);
    }
    Ok(Explicit { value, b_n, l4_u, f_n })
}

/// dv/dt = −νAv − B_N(v + Z) + χZ + f.
pub fn rhs_transformed(v: &SpectralField, z: &SpectralField, params: &SimParams) -> Result<SpectralField> {
    v.check_basis(z)?;
    let mut out = explicit_part(v, z, params)?.value;
    out.axpy(-params.nu, &v.stokes_apply());
    Ok(out)
}

/// Integrating-factor Heun scheme.
///
/// With E = e^{−νA dt} applied exactly and N(v, Z) the explicit part:
/// ṽ = E(vₙ + dt N(vₙ, Zₙ)),
/// vₙ₊₁ = E(vₙ + dt/2 N(vₙ, Zₙ)) + dt/2 N(ṽ, Zₙ₊₁).
#[derive(Debug, Clone)]
pub struct Stepper {
    pub params: SimParams,
    grid: TimeGrid,
    decay: Vec<f64>,
    ceiling: f64,
}

impl Stepper {
    pub fn new(params: &SimParams, v0_norm: f64) -> Result<Self> {
        params.validate()?;
        let grid = params.time_grid()?;
        let b = params.basis();
        let decay = (0..b.n_coeffs()).map(|j| libm::exp(-params.nu * b.eigenvalue_of_slot(j) * params.dt)).collect();
        let ceiling = params.ceiling_factor * v0_norm.max(1.0);
        Ok(Self { params: params.clone(), grid, decay, ceiling })
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn explicit(&self, st: &TrajectoryState) -> Result<Explicit> {
        explicit_part(&st.v, &st.z.z, &self.params)
    }

    /// Advance one step. `now` must be the explicit part at `st`; the explicit
    /// part at the new state is returned alongside it.
    pub fn step_with(&self, st: &TrajectoryState, now: &Explicit, path: &WienerPath) -> Result<(TrajectoryState, Explicit)> {
        let dt = self.params.dt;
        let mut z = st.z.clone();
        z.advance(path, self.grid.ticks_per_step as u64)?;

        let mut pred = st.v.clone();
        pred.axpy(dt, &now.value);
        pred.mul_diag(&self.decay);
        let mid = explicit_part(&pred, &z.z, &self.params)?;

        let mut v = st.v.clone();
        v.axpy(0.5 * dt, &now.value);
        v.mul_diag(&self.decay);
        v.axpy(0.5 * dt, &mid.value);

        let step = st.step + 1;
        let time = step as f64 * dt;
        let norm = v.norm_h();
        if !(norm <= self.ceiling) {
            return Err(Error::Unstable { t: time, norm, ceiling: self.ceiling });
        }
        let next = TrajectoryState { step, time, v, z };
        let ex = self.explicit(&next)?;
        Ok((next, ex))
    }

    /// Advance one step, recomputing the explicit part at `st`.
    pub fn step(&self, st: &TrajectoryState, path: &WienerPath) -> Result<TrajectoryState> {
        let now = self.explicit(st)?;
        Ok(self.step_with(st, &now, path)?.0)
    }
}

/// Single step of the scheme from `state`.
pub fn step(state: &TrajectoryState, path: &WienerPath, params: &SimParams) -> Result<TrajectoryState> {
    Stepper::new(params, state.v.norm_h())?.step(state, path)
}

/// Recording options for [`solve_from`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Record a ledger row (and state, if kept) every this many steps.
    pub record_every: u64,
    pub keep_states: bool,
    /// Track the a priori energy bounds; costs one extra L⁴ norm per step.
    pub track_bounds: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { record_every: 1, keep_states: true, track_bounds: false }
    }
}

/// Both sides of the a priori energy bounds at one recorded time.
///
/// With R(s) = (3N²/ν)‖Z‖²_{L⁴} + (3/ν)‖f‖²_{V'} + (3χ²/(νλ))‖Z‖²_H, the
/// Young splits ν/3 + ν/3 + νλ/3 of the dissipation give
/// d/dt‖v‖² + νλ‖v‖² ≤ R, hence
/// `integral`: ‖v(t)‖² + νλ∫‖v‖² ≤ ‖v₀‖² + ∫R and
/// `decay`: ‖v(t)‖² ≤ ‖v₀‖²e^{−νλt} + ∫e^{−νλ(t−s)}R(s)ds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: f64,
    pub integral_lhs: f64,
    pub integral_rhs: f64,
    pub decay_lhs: f64,
    pub decay_rhs: f64,
    /// Discretization slack: |residual| plus the dissipation quadrature gap.
    pub slack: f64,
    /// (‖v(t)‖² + νλ∫‖v‖² − ‖v₀‖²) / ∫(‖Z‖²_H + N²‖Z‖²_{L⁴} + ‖f‖²_{V'}), the constant the run needs.
    pub effective_constant: f64,
}

impl BoundRow {
    pub fn holds(&self) -> bool {
        self.integral_lhs <= self.integral_rhs + self.slack && self.decay_lhs <= self.decay_rhs + self.slack
    }
}

/// Output of a transformed solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub ledger: EnergyLedger,
    /// Recorded (v, Z) pairs, aligned with `ledger.rows` when kept.
    pub states: Vec<(f64, SpectralField, SpectralField)>,
    pub bounds: Vec<BoundRow>,
    pub final_state: TrajectoryState,
}

struct BoundTracker {
    on: bool,
    int_v: f64,
    int_r: f64,
    int_base: f64,
    decay_r: f64,
    last_r: f64,
    last_base: f64,
    last_h: f64,
}

impl BoundTracker {
    fn terms(p: &SimParams, st: &TrajectoryState) -> (f64, f64) {
        let n = p.n();
        let zl4 = crate::spectral::norm_l4(&st.z.z);
        let zh = st.z.z.norm_h_sq();
        let f = p.forcing.norm_vdual_sq();
        let lam = p.lambda_p;
        let r = 3.0 * n * n / p.nu * zl4 * zl4 + 3.0 / p.nu * f + 3.0 * p.chi * p.chi / (p.nu * lam) * zh;
        (r, zh + n * n * zl4 * zl4 + f)
    }
}

fn row(st: &TrajectoryState, ex: &Explicit, p: &SimParams, led: &EnergyLedger) -> LedgerRow {
    let v = &st.v;
    let h_sq_v = v.norm_h_sq();
    LedgerRow {
        t: st.time,
        h_sq_v,
        v_sq_v: v.norm_v_sq(),
        l4_u: ex.l4_u,
        f_n: ex.f_n,
        work_b: ex.b_n.inner(v),
        work_f: p.forcing.inner(v),
        work_chi: p.chi * st.z.z.inner(v),
        residual: h_sq_v + led.dissipation + led.work - led.v0_sq,
        h_u: st.u().norm_h(),
    }
}

/// Integrate `steps` steps from `state`, keeping the energy ledger.
pub fn solve_from(
    state: TrajectoryState,
    path: &WienerPath,
    params: &SimParams,
    steps: u64,
    opts: SolveOptions,
) -> Result<Solution> {
    let stepper = Stepper::new(params, state.v.norm_h())?;
    let every = opts.record_every.max(1);
    let nu = params.nu;
    let dt = params.dt;
    let lam = params.lambda_p;
    let mut led = EnergyLedger { v0_sq: state.v.norm_h_sq(), ..Default::default() };
    let mut states = Vec::new();
    let mut bounds = Vec::new();
    let track = opts.track_bounds && params.n_cutoff.is_some();
    let mut bt = BoundTracker {
        on: track,
        int_v: 0.0,
        int_r: 0.0,
        int_base: 0.0,
        decay_r: 0.0,
        last_r: 0.0,
        last_base: 0.0,
        last_h: led.v0_sq,
    };
    let decay_exp = libm::exp(-nu * lam * dt);

    let mut st = state;
    let mut ex = stepper.explicit(&st)?;
    let work_integrand = |r: &LedgerRow| 2.0 * r.work_b - 2.0 * r.work_f - 2.0 * r.work_chi;
    let mut prev = row(&st, &ex, params, &led);
    led.rows.push(prev);
    if opts.keep_states {
        states.push((st.time, st.v.clone(), st.z.z.clone()));
    }
    if bt.on {
        let (r, base) = BoundTracker::terms(params, &st);
        bt.last_r = r;
        bt.last_base = base;
        bounds.push(BoundRow {
            t: st.time,
            integral_lhs: led.v0_sq,
            integral_rhs: led.v0_sq,
            decay_lhs: led.v0_sq,
            decay_rhs: led.v0_sq,
            slack: 0.0,
            effective_constant: 0.0,
        });
    }
    let b = params.basis().clone();
    let mut prev_c: Vec<f64> = st.v.coeffs().iter().map(|c| c.norm_sqr()).collect();

    for i in 1..=steps {
        let (next, nex) = stepper.step_with(&st, &ex, path)?;
        // Dissipation: per-coefficient logarithmic mean.
        let mut diss = 0.0;
        let mut trap = 0.0;
        for (j, c) in next.v.coeffs().iter().enumerate() {
            let a = prev_c[j];
            let bb = c.norm_sqr();
            let w = 2.0 * nu * b.eigenvalue_of_slot(j) * dt;
            diss += w * log_mean(a, bb);
            trap += w * 0.5 * (a + bb);
            prev_c[j] = bb;
        }
        led.dissipation += diss;
        led.quadrature_gap += trap - diss;
        let mut cur = row(&next, &nex, params, &led);
        led.work += 0.5 * dt * (work_integrand(&prev) + work_integrand(&cur));
        cur.residual = cur.h_sq_v + led.dissipation + led.work - led.v0_sq;
        st = next;
        ex = nex;

        if bt.on {
            let (r, base) = BoundTracker::terms(params, &st);
            bt.int_v += 0.5 * dt * (bt.last_h + cur.h_sq_v);
            bt.int_r += 0.5 * dt * (bt.last_r + r);
            bt.int_base += 0.5 * dt * (bt.last_base + base);
            bt.decay_r = decay_exp * bt.decay_r + 0.5 * dt * (decay_exp * bt.last_r + r);
            bt.last_r = r;
            bt.last_base = base;
            bt.last_h = cur.h_sq_v;
            if i % every == 0 || i == steps {
                let lhs = cur.h_sq_v + nu * lam * bt.int_v;
                bounds.push(BoundRow {
                    t: st.time,
                    integral_lhs: lhs,
                    integral_rhs: led.v0_sq + bt.int_r,
                    decay_lhs: cur.h_sq_v,
                    decay_rhs: led.v0_sq * libm::exp(-nu * lam * st.time) + bt.decay_r,
                    slack: cur.residual.abs() + led.quadrature_gap.abs() + 1e-12 * (1.0 + lhs),
                    effective_constant: if bt.int_base > 0.0 { (lhs - led.v0_sq) / bt.int_base } else { 0.0 },
                });
            }
        }
        if i % every == 0 || i == steps {
            led.rows.push(cur);
            if opts.keep_states {
                states.push((st.time, st.v.clone(), st.z.z.clone()));
            }
        }
        prev = cur;
    }
    Ok(Solution { ledger: led, states, bounds, final_state: st })
}

/// Solve on [0, T] from transformed initial datum `v0`, with Z stationary at time 0.
pub fn solve_transformed(v0: &SpectralField, path: &WienerPath, params: &SimParams) -> Result<Solution> {
    solve_transformed_with(v0, path, params, SolveOptions::default())
}

pub fn solve_transformed_with(
    v0: &SpectralField,
    path: &WienerPath,
    params: &SimParams,
    opts: SolveOptions,
) -> Result<Solution> {
    params.validate()?;
    let grid = params.time_grid()?;
    let z = OuState::stationary(params.basis(), path, params.chi, params.nu, params.ou_scheme, grid.sub, 0)?;
    let st = TrajectoryState { step: 0, time: 0.0, v: v0.clone(), z };
    solve_from(st, path, params, params.steps()?, opts)
}
