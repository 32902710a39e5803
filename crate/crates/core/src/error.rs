use alloc::string::String;

/// Errors reported by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("kmax = {0} outside the supported range 1..={max}", max = crate::spectral::MAX_KMAX)]
    InvalidKmax(u32),
    #[error("fields live on different bases")]
    BasisMismatch,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("time {t} is not on the grid of spacing {spacing}")]
    OffGrid { t: f64, spacing: f64 },
    #[error("path index {index} outside the materialized window [{lo}, {hi}]")]
    PathWindow { index: i64, lo: i64, hi: i64 },
    #[error("instability at t = {t}: |v|_H = {norm:e} exceeds ceiling {ceiling:e}")]
    Unstable { t: f64, norm: f64, ceiling: f64 },
    #[error("malformed field record: {0}")]
    Format(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
