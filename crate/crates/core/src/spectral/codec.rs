//! Versioned binary record for fields: one version byte, `kmax` as u32,
//! the coefficient count as u32, then `(re, im)` pairs as f64, all
//! little-endian, in storage order.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::basis::GalerkinBasis;
use super::field::SpectralField;
use crate::error::{Error, Result};

pub const FIELD_FORMAT_VERSION: u8 = 1;

pub fn encode_field(u: &SpectralField) -> Vec<u8> {
    let c = u.coeffs();
    let mut out = Vec::with_capacity(9 + 16 * c.len());
    out.push(FIELD_FORMAT_VERSION);
    out.extend_from_slice(&u.basis().kmax().to_le_bytes());
    out.extend_from_slice(&(c.len() as u32).to_le_bytes());
    for z in c {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn read_u32(b: &[u8], at: usize) -> Result<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes(s.try_into().unwrap()))
        .ok_or_else(|| Error::Format("truncated header".into()))
}

/// `kmax` stored in a record, for choosing the basis before decoding.
pub fn peek_kmax(bytes: &[u8]) -> Result<u32> {
    match bytes.first() {
        Some(&FIELD_FORMAT_VERSION) => read_u32(bytes, 1),
        Some(v) => Err(Error::Format(alloc::format!("unsupported version {v}"))),
        None => Err(Error::Format("empty record".into())),
    }
}

pub fn decode_field(bytes: &[u8], basis: &Arc<GalerkinBasis>) -> Result<SpectralField> {
    let kmax = peek_kmax(bytes)?;
    if kmax != basis.kmax() {
        return Err(Error::BasisMismatch);
    }
    let n = read_u32(bytes, 5)? as usize;
    if bytes.len() != 9 + 16 * n {
        return Err(Error::Format(alloc::format!("expected {} bytes, got {}", 9 + 16 * n, bytes.len())));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let coeffs = (0..n).map(|j| Complex64::new(f(9 + 16 * j), f(17 + 16 * j))).collect();
    SpectralField::from_coeffs(basis, coeffs)
}
