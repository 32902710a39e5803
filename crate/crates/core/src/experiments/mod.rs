//! Scripted experiments: mean-square contraction above the viscosity
//! threshold, pullback absorption, the N → ∞ limit to plain Navier-Stokes,
//! and invariant-measure sampling.

mod contraction;
mod measure;
mod nse_limit;
mod pullback;
pub mod stats;

use alloc::vec::Vec;

pub use contraction::{contraction_experiment, ContractionReport};
pub use measure::{invariant_measure_sampler, MeasureConfig, MeasureReport, MeasureRun, Observable, ObservableStats, PairCheck};
pub use nse_limit::{
    ladyzhenskaya_k_t, nse_l4_scale, nse_limit_experiment, solve_nse, NseLimitReport, NseLimitRow, LADYZHENSKAYA_CONSTANT,
};
pub use pullback::{pullback_absorption, PullbackPoint, PullbackReport};

/// Executes independent ensemble members; results come back in index order.
pub trait EnsembleRunner {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs members one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl EnsembleRunner for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Viscosity above which the mean-square contraction rate is positive:
/// (7N/2)(1/(112λ))^{1/8}.
pub fn stability_threshold(n: f64, lambda_p: f64) -> f64 {
    3.5 * n * libm::pow(1.0 / (112.0 * lambda_p), 0.125)
}
