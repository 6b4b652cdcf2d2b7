use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_circle, CircleFit, EstimatorError};
use crate::dynamics::AtomRates;
use crate::scattering::{rates_from_network, weak_coefficients, CouplingNetwork};
use crate::spectrum::{flux_for_frequency, FluxQubitParams};
use crate::units::angular;

/// Synthetic reflection sweeps span |δω| ≤ SWEEP_HALF_SPAN·Γ₂ …
pub const SWEEP_HALF_SPAN: f64 = 5.0;
/// … with this many uniformly spaced points.
pub const SWEEP_POINTS: usize = 101;

/// Lower bound on Γ₁ᵉ/Γ₁ from a Smith-circle radius ρ = Γ₁ᵉ/2Γ₂. Holds
/// because Γ₂ ≥ Γ₁/2.
pub fn efficiency_bound_from_radius(fit: &CircleFit) -> Result<f64, EstimatorError> {
    let r = fit.radius;
    if !(r > 0.0 && r <= 1.0 + 1e-6) {
        return Err(EstimatorError::OutOfRange { name: "radius", value: r });
    }
    Ok(r.min(1.0))
}

/// Gaussian excess of pure dephasing around a flux point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingBump {
    /// |δΦ| of the bump centre, Φ₀.
    pub center: f64,
    /// Standard deviation in Φ₀.
    pub width: f64,
    /// Peak excess dephasing, rad/s.
    pub height: f64,
}

impl DephasingBump {
    /// Bump centred where the qubit sits at `frequency` Hz.
    pub fn at_frequency(params: &FluxQubitParams, frequency: f64, width: f64, height: f64) -> Result<Self, EstimatorError> {
        Ok(Self { center: flux_for_frequency(params, frequency)?, width, height })
    }
}

/// Pure dephasing γ(δΦ) = base + Σ bumps; a scenario input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DephasingModel {
    pub base: f64,
    pub bumps: Vec<DephasingBump>,
}

impl DephasingModel {
    pub fn constant(base: f64) -> Self {
        Self { base, bumps: Vec::new() }
    }

    pub fn gamma_at(&self, dphi: f64) -> f64 {
        let d = dphi.abs();
        self.base
            + self
                .bumps
                .iter()
                .map(|b| b.height * (-0.5 * ((d - b.center) / b.width).powi(2)).exp())
                .sum::<f64>()
    }
}

/// Pure dephasing that brings the circle radius of `rates` down to `bound`.
pub fn dephasing_for_bound(rates: &AtomRates, bound: f64) -> Result<f64, EstimatorError> {
    let gamma = 0.5 * rates.gamma1_e() / bound - 0.5 * rates.gamma1();
    if !(bound > 0.0 && gamma >= 0.0) {
        return Err(EstimatorError::OutOfRange { name: "bound", value: bound });
    }
    Ok(gamma)
}

/// Weak-drive r_e over |δω| ≤ 5Γ₂ (101 points), as a network analyser would record it.
pub fn reflection_sweep(rates: &AtomRates, net: &CouplingNetwork) -> Vec<Complex64> {
    let g2 = rates.gamma2();
    (0..SWEEP_POINTS)
        .map(|k| {
            let x = -SWEEP_HALF_SPAN + 2.0 * SWEEP_HALF_SPAN * k as f64 / (SWEEP_POINTS - 1) as f64;
            weak_coefficients(rates, net, x * g2).r_e
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    /// Transition frequency, Hz.
    pub frequency: f64,
    /// |δΦ| in Φ₀.
    pub flux: f64,
    /// Circle-radius lower bound on the efficiency.
    pub bound: f64,
    /// Γ₁ᵉ/Γ₁ of the rates used to synthesize the sweep.
    pub efficiency: f64,
    pub fit: CircleFit,
}

/// Efficiency versus transition frequency: for each target invert the flux,
/// build the rates at that frequency (radiative part scaling with ω), record
/// a weak-drive r_e sweep, fit its circle and convert the radius to a bound.
pub fn efficiency_sweep(
    params: &FluxQubitParams,
    network: &CouplingNetwork,
    dephasing: &DephasingModel,
    gamma1_nr: f64,
    targets: &[f64],
) -> Result<Vec<EfficiencyPoint>, EstimatorError> {
    targets
        .par_iter()
        .map(|&frequency| {
            let flux = flux_for_frequency(params, frequency)?;
            let rates = rates_from_network(network, angular(frequency))
                .with_nonradiative(gamma1_nr)
                .and_then(|r| r.with_dephasing(dephasing.gamma_at(flux)))
                .map_err(crate::scattering::ScatteringError::from)?;
            let fit = fit_circle(&reflection_sweep(&rates, network))?;
            Ok(EfficiencyPoint {
                frequency,
                flux,
                bound: efficiency_bound_from_radius(&fit)?,
                efficiency: rates.emission_efficiency(),
                fit,
            })
        })
        .collect()
}
