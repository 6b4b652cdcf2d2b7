//! Flux-qubit transition frequency versus flux bias.
//!
//! Near a degeneracy point the two lowest flux states split as
//! hf₁₀ = √((2·I_p·δΦ)² + Δ²), with δΦ measured from (N + ½)Φ₀ and Δ treated
//! as constant within one valley.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{FLUX_QUANTUM, PLANCK};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("tunnelling gap must be positive and finite, got {0} Hz")]
    InvalidGap(f64),
    #[error("persistent current must be non-negative and finite, got {0} A")]
    InvalidCurrent(f64),
    #[error("flux detuning {0} Φ₀ is outside the degeneracy valley (|δΦ| < 0.5)")]
    FluxOutOfValley(f64),
    #[error("target frequency {target} Hz is below the gap {gap} Hz")]
    TargetBelowGap { target: f64, gap: f64 },
    #[error("target frequency {target} Hz is above the valley maximum {max} Hz")]
    TargetAboveValley { target: f64, max: f64 },
}

/// Tunnelling gap Δ/h (Hz) and persistent current I_p (A).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxQubitParams {
    gap: f64,
    persistent_current: f64,
}

impl FluxQubitParams {
    pub fn new(gap: f64, persistent_current: f64) -> Result<Self, SpectrumError> {
        if !(gap.is_finite() && gap > 0.0) {
            return Err(SpectrumError::InvalidGap(gap));
        }
        if !(persistent_current.is_finite() && persistent_current >= 0.0) {
            return Err(SpectrumError::InvalidCurrent(persistent_current));
        }
        Ok(Self { gap, persistent_current })
    }

    /// Device values: Δ/h = 6.728 GHz, I_p = 24 nA.
    pub fn reference_device() -> Self {
        Self { gap: 6.728e9, persistent_current: 24e-9 }
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn persistent_current(&self) -> f64 {
        self.persistent_current
    }

    /// Flux-tuning slope 2·I_p·Φ₀/h in Hz per Φ₀.
    pub fn flux_slope(&self) -> f64 {
        2.0 * self.persistent_current * FLUX_QUANTUM / PLANCK
    }

    /// Highest frequency reachable inside one valley (|δΦ| → 0.5).
    pub fn valley_maximum(&self) -> f64 {
        self.gap.hypot(0.5 * self.flux_slope())
    }
}

/// Flux detuning δΦ (units of Φ₀) from the degeneracy point of valley `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBias {
    dphi: f64,
    /// Flux-quantum index N; carried as metadata only.
    pub n: i64,
}

impl FluxBias {
    pub fn new(dphi: f64, n: i64) -> Result<Self, SpectrumError> {
        if !(dphi.is_finite() && dphi.abs() < 0.5) {
            return Err(SpectrumError::FluxOutOfValley(dphi));
        }
        Ok(Self { dphi, n })
    }

    /// Bias in valley 0.
    pub fn at(dphi: f64) -> Result<Self, SpectrumError> {
        Self::new(dphi, 0)
    }

    pub fn dphi(&self) -> f64 {
        self.dphi
    }
}

/// Transition frequency f₁₀ in Hz.
pub fn transition_frequency(params: &FluxQubitParams, bias: FluxBias) -> f64 {
    frequency_at(params, bias.dphi)
}

fn frequency_at(params: &FluxQubitParams, dphi: f64) -> f64 {
    // hypot is even in its arguments, so f(δΦ) == f(−δΦ) bit for bit
    (params.flux_slope() * dphi).hypot(params.gap)
}

/// Non-negative |δΦ| (units of Φ₀) at which the qubit sits at `target` Hz.
pub fn flux_for_frequency(params: &FluxQubitParams, target: f64) -> Result<f64, SpectrumError> {
    let gap = params.gap;
    if !(target >= gap) {
        return Err(SpectrumError::TargetBelowGap { target, gap });
    }
    let max = params.valley_maximum();
    if target > max {
        return Err(SpectrumError::TargetAboveValley { target, max });
    }
    if target == gap {
        return Ok(0.0);
    }
    // (t − g)(t + g) avoids cancellation close to the gap
    let energy = ((target - gap) * (target + gap)).sqrt();
    Ok(energy / params.flux_slope())
}

/// Uniform δΦ grid between `range.0` and `range.1` with the resonance at each point.
pub fn sweep_spectrum(params: &FluxQubitParams, range: (f64, f64), n_points: usize) -> Vec<(f64, f64)> {
    assert!(n_points >= 2, "sweep_spectrum needs at least two points");
    let (lo, hi) = range;
    let step = (hi - lo) / (n_points - 1) as f64;
    (0..n_points)
        .map(|i| {
            // mirror the upper half so symmetric ranges give symmetric grids exactly
            let dphi = if i * 2 < n_points { lo + step * i as f64 } else { hi - step * (n_points - 1 - i) as f64 };
            (dphi, frequency_at(params, dphi))
        })
        .collect()
}
