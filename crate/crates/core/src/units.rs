//! Physical constants and unit conversions shared by every module.
//!
//! Interfaces take ordinary frequencies in Hz; dynamics and rates are carried
//! as angular frequencies in rad/s. [`angular`] and [`ordinary`] are the only
//! place the factor 2π enters.

use std::f64::consts::TAU;

/// Planck constant, J·s (exact, SI 2019).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C (exact, SI 2019).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant ħ = h/2π, J·s.
pub const HBAR: f64 = PLANCK / TAU;
/// Superconducting flux quantum Φ₀ = h/2e, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Hz → rad/s.
#[inline]
pub fn angular(frequency_hz: f64) -> f64 {
    TAU * frequency_hz
}

/// rad/s → Hz.
#[inline]
pub fn ordinary(omega: f64) -> f64 {
    omega / TAU
}

/// dBm → W.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// W → dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Peak voltage of a travelling wave carrying `power` watts on a line of
/// impedance `z`: P = V₀²/(2Z).
pub fn wave_amplitude(power: f64, z: f64) -> f64 {
    (2.0 * z * power).sqrt()
}

/// Inverse of [`wave_amplitude`].
pub fn wave_power(amplitude: f64, z: f64) -> f64 {
    amplitude * amplitude / (2.0 * z)
}
