//! Scalar math helpers.
//!
//! All transcendental functions go through `libm` so results are identical
//! with and without `std` and across platforms.

pub use libm::{cos, exp, fabs, log, log10, log2, pow, sin, sqrt};

/// True for finite, strictly positive values; rejects NaN and infinities.
#[inline]
pub fn is_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Convert a dB value to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

/// Convert a linear power ratio to dB.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * log10(linear)
}

/// Transmit power in dBm from Watts.
#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * log10(watts * 1e3)
}

/// Spectral efficiency in bits/s/Hz from a linear SINR.
#[inline]
pub fn se_from_sinr(sinr: f64) -> f64 {
    log2(1.0 + sinr)
}

/// Compensated (Kahan) accumulator for long summations.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}
