//! Tolerance conventions shared by every module.
//!
//! Sign tests compare a value against a scale built from the magnitudes of
//! the terms that produced it, so that rounding in large intermediate terms
//! is never mistaken for a sign.

use serde::{Deserialize, Serialize};

/// Absolute tolerance near zero crossings.
pub const ABS_ZERO: f64 = 1e-12;

/// Relative tolerance away from zero crossings.
pub const REL: f64 = 1e-10;

/// Default threshold for sign tests, applied as `SIGN * (1 + |scale|)`.
pub const SIGN: f64 = 1e-9;

/// Default relative tolerance for quadratures.
pub const QUADRATURE: f64 = 1e-10;

/// Relative tolerance for `φ′ = 1 − αφ`.
pub const PHI_IDENTITY: f64 = 1e-12;

/// Relative tolerance for the discriminant identity behind `S`.
pub const DISCRIMINANT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub sign: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: QUADRATURE,
            sign: SIGN,
        }
    }
}

/// Width of the band around zero in which `v` counts as zero.
#[inline]
pub fn zero_band(sign_tol: f64, scale: f64) -> f64 {
    sign_tol * (1.0 + scale.abs())
}

#[inline]
pub fn is_nonneg(v: f64, scale: f64, sign_tol: f64) -> bool {
    v >= -zero_band(sign_tol, scale)
}

#[inline]
pub fn is_nonpos(v: f64, scale: f64, sign_tol: f64) -> bool {
    v <= zero_band(sign_tol, scale)
}

/// `|a - b| <= rel * max(|a|, |b|, floor)`.
#[inline]
pub fn rel_close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
