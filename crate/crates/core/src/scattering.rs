//! Circuit parameters → decay rates and drive strength, and the complex
//! reflection/transmission coefficients seen by a network analyser.
//!
//! A coupling capacitance C to a line of impedance Z exposes the atom's
//! dipole voltage ν_a to voltage noise S_V(ω) = 2ħωZ, giving the radiative
//! rate Γ₁ = 2ωZ(Cν_a)²/ħ into that line.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{steady_state_sigma_minus, AtomRates, Drive, DynamicsError};
use crate::spectrum::{FluxBias, FluxQubitParams, SpectrumError};
use crate::units::{angular, wave_amplitude, HBAR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("empty {0} grid")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Which half-space a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    Control,
    Emission,
}

/// Coupling capacitances C_c, C_e (F), line impedance Z (Ω) and atomic dipole
/// voltage ν_a (V).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingNetwork {
    c_control: f64,
    c_emission: f64,
    line_impedance: f64,
    dipole_voltage: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64, ScatteringError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ScatteringError::NonPositive { name, value })
    }
}

impl CouplingNetwork {
    pub fn new(c_control: f64, c_emission: f64, line_impedance: f64, dipole_voltage: f64) -> Result<Self, ScatteringError> {
        Ok(Self {
            c_control: positive("c_control", c_control)?,
            c_emission: positive("c_emission", c_emission)?,
            line_impedance: positive("line_impedance", line_impedance)?,
            dipole_voltage: positive("dipole_voltage", dipole_voltage)?,
        })
    }

    /// Geometry only; ν_a = 0 until [`CouplingNetwork::calibrated`] is applied.
    pub fn uncalibrated(c_control: f64, c_emission: f64, line_impedance: f64) -> Result<Self, ScatteringError> {
        Ok(Self {
            c_control: positive("c_control", c_control)?,
            c_emission: positive("c_emission", c_emission)?,
            line_impedance: positive("line_impedance", line_impedance)?,
            dipole_voltage: 0.0,
        })
    }

    /// 1 fF / 5 fF on 50 Ω lines, ν_a fixed by Γ₁/2π = 12.5 MHz at 6.728 GHz.
    pub fn reference_device() -> Self {
        Self::uncalibrated(1e-15, 5e-15, 50.0)
            .and_then(|n| n.calibrated(angular(6.728e9), angular(12.5e6)))
            .expect("reference values are valid")
    }

    /// Copy with ν_a chosen so the total radiative rate at `omega` is `target_rate`.
    pub fn calibrated(self, omega: f64, target_rate: f64) -> Result<Self, ScatteringError> {
        let nu = dipole_for_target_rate(&self, omega, target_rate)?;
        Ok(Self { dipole_voltage: nu, ..self })
    }

    pub fn with_dipole(self, dipole_voltage: f64) -> Result<Self, ScatteringError> {
        if !(dipole_voltage.is_finite() && dipole_voltage >= 0.0) {
            return Err(ScatteringError::Negative { name: "dipole_voltage", value: dipole_voltage });
        }
        Ok(Self { dipole_voltage, ..self })
    }

    pub fn c_control(&self) -> f64 {
        self.c_control
    }

    pub fn c_emission(&self) -> f64 {
        self.c_emission
    }

    pub fn line_impedance(&self) -> f64 {
        self.line_impedance
    }

    pub fn dipole_voltage(&self) -> f64 {
        self.dipole_voltage
    }

    pub fn capacitance(&self, line: Line) -> f64 {
        match line {
            Line::Control => self.c_control,
            Line::Emission => self.c_emission,
        }
    }
}

/// Complex amplitude ratios at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPoint {
    pub r_c: Complex64,
    pub t_ce: Complex64,
    pub r_e: Complex64,
}

/// Radiative rates Γ₁^{c,e} = 2ωZ(C_{c,e}ν_a)²/ħ; Γ₁ⁿʳ = γ = 0.
pub fn rates_from_network(net: &CouplingNetwork, omega: f64) -> AtomRates {
    let k = 2.0 * omega * net.line_impedance / HBAR;
    let rate = |c: f64| k * (c * net.dipole_voltage).powi(2);
    AtomRates::radiative(rate(net.c_control), rate(net.c_emission)).expect("rates of a valid network are non-negative")
}

/// ν_a for which the radiative rate Γ₁ᶜ + Γ₁ᵉ at `omega` equals `target_rate`.
/// The dipole voltage already stored in `net` is ignored.
pub fn dipole_for_target_rate(net: &CouplingNetwork, omega: f64, target_rate: f64) -> Result<f64, ScatteringError> {
    positive("omega", omega)?;
    positive("target_rate", target_rate)?;
    let c2 = net.c_control.powi(2) + net.c_emission.powi(2);
    Ok((target_rate * HBAR / (2.0 * omega * net.line_impedance * c2)).sqrt())
}

/// Rabi frequency Ω = 2V₀Cν_a/ħ produced by a travelling wave of
/// `incident_power` watts arriving on `line`; V₀ = √(2ZP).
pub fn rabi_from_power(net: &CouplingNetwork, line: Line, incident_power: f64) -> f64 {
    debug_assert!(incident_power >= 0.0);
    let v0 = wave_amplitude(incident_power, net.line_impedance);
    2.0 * v0 * net.capacitance(line) * net.dipole_voltage / HBAR
}

/// Weak-drive coefficients r_c, t_ce, r_e at detuning δω (rad/s).
pub fn weak_coefficients(rates: &AtomRates, net: &CouplingNetwork, detuning: f64) -> ScatteringPoint {
    let g2 = rates.gamma2();
    let lorentz = Complex64::new(1.0, -detuning / g2).inv();
    let one = Complex64::new(1.0, 0.0);
    ScatteringPoint {
        r_c: one - lorentz * (rates.gamma1_c() / g2),
        t_ce: -lorentz * (rates.gamma1_e() / g2 * net.c_control / net.c_emission),
        r_e: one - lorentz * (rates.gamma1_e() / g2),
    }
}

/// Emission-line reflection at arbitrary drive strength, the atom being driven
/// from the emission line itself.
///
/// The scattered wave is V_e = i(ħΓ₁ᵉ/C_eν_a)⟨σ⁻⟩ against an incident
/// V₀ = −ħΩ/(2C_eν_a), so r_e = 1 − i(2Γ₁ᵉ/Ω)⟨σ⁻⟩. At Ω = 0 the weak limit is
/// returned.
pub fn driven_reflection_emission(rates: &AtomRates, drive: &Drive) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if drive.rabi == 0.0 {
        let g2 = rates.gamma2();
        return one - Complex64::new(1.0, -drive.detuning / g2).inv() * (rates.gamma1_e() / g2);
    }
    let sm = steady_state_sigma_minus(rates, drive);
    one - Complex64::i() * sm * (2.0 * rates.gamma1_e() / drive.rabi)
}

/// Magnitude |Z_C| of the series coupling impedance 1/(iω(C_c + C_e)).
pub fn coupling_impedance(net: &CouplingNetwork, omega: f64) -> f64 {
    1.0 / (omega * (net.c_control + net.c_emission))
}

/// Fraction |2Z/Z_C|² of control-line power leaking straight into the
/// emission line through the coupling capacitances.
pub fn direct_leakage(net: &CouplingNetwork, omega: f64) -> f64 {
    (2.0 * net.line_impedance * omega * (net.c_control + net.c_emission)).powi(2)
}

/// Rate budget across the tuning range: radiative rates follow the network at
/// the local ω₁₀; non-radiative decay and dephasing are added on top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub network: CouplingNetwork,
    pub gamma1_nr: f64,
    pub gamma_phi: f64,
}

impl RateModel {
    pub fn rates_at(&self, omega: f64) -> Result<AtomRates, ScatteringError> {
        Ok(rates_from_network(&self.network, omega)
            .with_nonradiative(self.gamma1_nr)?
            .with_dephasing(self.gamma_phi)?)
    }
}

/// Normalized |t_ce/t₀| over a flux × frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionMap {
    pub flux: Vec<f64>,
    pub frequency: Vec<f64>,
    /// Row per flux point, column per frequency point.
    pub values: Vec<Vec<f64>>,
    /// Global maximum |t_ce| used as t₀.
    pub t0: f64,
}

impl TransmissionMap {
    /// Frequency of the largest value in each flux row.
    pub fn ridge(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| {
                let k = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                self.frequency[k]
            })
            .collect()
    }
}

/// Evaluates the weak-drive |t_ce| at δω = ω − ω₁₀(δΦ) for every grid point
/// (flux in Φ₀, frequency in Hz) and normalizes by the global maximum.
pub fn transmission_map(
    params: &FluxQubitParams,
    model: &RateModel,
    flux: &[f64],
    frequency: &[f64],
) -> Result<TransmissionMap, ScatteringError> {
    if flux.is_empty() {
        return Err(ScatteringError::EmptyGrid("flux"));
    }
    if frequency.is_empty() {
        return Err(ScatteringError::EmptyGrid("frequency"));
    }
    let rows: Vec<Vec<f64>> = flux
        .par_iter()
        .map(|&dphi| {
            let bias = FluxBias::at(dphi)?;
            let w10 = angular(crate::spectrum::transition_frequency(params, bias));
            let rates = model.rates_at(w10)?;
            Ok(frequency
                .iter()
                .map(|&f| weak_coefficients(&rates, &model.network, angular(f) - w10).t_ce.norm())
                .collect())
        })
        .collect::<Result<_, ScatteringError>>()?;
    let t0 = rows.iter().flatten().cloned().fold(0.0, f64::max);
    let values = if t0 > 0.0 { rows.into_iter().map(|r| r.into_iter().map(|v| v / t0).collect()).collect() } else { rows };
    Ok(TransmissionMap { flux: flux.to_vec(), frequency: frequency.to_vec(), values, t0 })
}

/// Emission-line reflection traces, one per incident power, driven from the
/// emission line. `detunings` in rad/s, `powers` in W.
pub fn smith_power_sweep(
    rates: &AtomRates,
    net: &CouplingNetwork,
    carrier: f64,
    powers: &[f64],
    detunings: &[f64],
) -> Vec<Vec<Complex64>> {
    powers
        .iter()
        .map(|&p| {
            let rabi = rabi_from_power(net, Line::Emission, p);
            detunings
                .iter()
                .map(|&dw| driven_reflection_emission(rates, &Drive::new(rabi, dw, carrier)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::dbm_to_watts;
    use proptest::prelude::*;

    fn net() -> CouplingNetwork {
        CouplingNetwork::reference_device()
    }

    #[test]
    fn radiative_split() {
        let r = rates_from_network(&net(), angular(6.728e9));
        assert!((r.gamma1_e() / r.gamma1_c() - 25.0).abs() < 1e-12);
        assert!((r.emission_efficiency() - 25.0 / 26.0).abs() < 1e-15);
        assert!((r.gamma1() - angular(12.5e6)).abs() / r.gamma1() < 1e-12);
    }

    #[test]
    fn zero_dipole_gives_zero_rates() {
        let n = CouplingNetwork::uncalibrated(1e-15, 5e-15, 50.0).unwrap();
        let r = rates_from_network(&n, angular(7e9));
        assert_eq!(r.gamma1(), 0.0);
    }

    #[test]
    fn dipole_inversion() {
        let n = CouplingNetwork::uncalibrated(1e-15, 5e-15, 50.0).unwrap();
        let w = angular(6.728e9);
        let target = angular(12.5e6);
        let nu = dipole_for_target_rate(&n, w, target).unwrap();
        // ν_a = √(Γħ/(2ωZ(C_c² + C_e²))) with exact SI constants
        assert!((nu - 8.680_873_381_039_92e-6).abs() / nu < 1e-10, "{nu}");
        let nu2 = dipole_for_target_rate(&n, w, 2.0 * target).unwrap();
        assert!((nu2 / nu - 2f64.sqrt()).abs() < 1e-14);
        assert!(dipole_for_target_rate(&n, w, 0.0).is_err());
    }

    #[test]
    fn rabi_scaling() {
        let n = net();
        assert_eq!(rabi_from_power(&n, Line::Control, 0.0), 0.0);
        let a = rabi_from_power(&n, Line::Control, 1e-16);
        let b = rabi_from_power(&n, Line::Control, 4e-16);
        assert!((b / a - 2.0).abs() < 1e-14);
        let e = rabi_from_power(&n, Line::Emission, 1e-16);
        assert!((e / a - 5.0).abs() < 1e-14);
    }

    #[test]
    fn far_off_resonance() {
        let r = rates_from_network(&net(), angular(6.728e9));
        let p = weak_coefficients(&r, &net(), 1e30);
        assert!((p.r_c - 1.0).norm() < 1e-12 && (p.r_e - 1.0).norm() < 1e-12 && p.t_ce.norm() < 1e-12);
    }

    #[test]
    fn reflection_at_three_quarter_radius() {
        let g2 = 1.0e8;
        let r = AtomRates::new(0.0, 1.5 * g2, 0.0, 0.25 * g2).unwrap();
        assert!((r.gamma1_e() / (2.0 * r.gamma2()) - 0.75).abs() < 1e-15);
        let p = weak_coefficients(&r, &net(), 0.0);
        assert!((p.r_e - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn resonant_conservation() {
        let r = rates_from_network(&net(), angular(6.728e9));
        let p = weak_coefficients(&r, &net(), 0.0);
        assert!((p.r_c.re - 24.0 / 26.0).abs() < 1e-12 && p.r_c.im.abs() < 1e-15);
        assert!((p.t_ce.re + 10.0 / 26.0).abs() < 1e-12);
        assert!((p.r_c.norm_sqr() + p.t_ce.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn driven_reflection_limits() {
        let r = rates_from_network(&net(), angular(6.728e9));
        let g = r.gamma1();
        for dw in [0.0, 0.3 * g, -2.0 * g] {
            let weak = weak_coefficients(&r, &net(), dw).r_e;
            let driven = driven_reflection_emission(&r, &Drive::new(1e-6 * g, dw, 6.728e9));
            assert!((weak - driven).norm() < 1e-9);
        }
        let sat = driven_reflection_emission(&r, &Drive::resonant(1e6 * g, 6.728e9));
        assert!((sat - 1.0).norm() < 1e-6);
    }

    #[test]
    fn driven_reflection_at_saturation_parameter_one() {
        // ρ = 0.75, Ω²/Γ₁Γ₂ = 1 → r_e = 1 − 2ρ/2
        let g2 = 1.0e8;
        let r = AtomRates::new(0.0, 1.5 * g2, 0.0, 0.25 * g2).unwrap();
        let om = (r.gamma1() * r.gamma2()).sqrt();
        let re = driven_reflection_emission(&r, &Drive::resonant(om, 6.728e9));
        assert!((re - Complex64::new(0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn oval_deformation_is_monotone() {
        let r = rates_from_network(&net(), angular(6.728e9));
        let mut prev = f64::INFINITY;
        for dbm in (-149..=-125).step_by(3) {
            let om = rabi_from_power(&net(), Line::Emission, dbm_to_watts(dbm as f64));
            let dip = 1.0 - driven_reflection_emission(&r, &Drive::resonant(om, 6.728e9)).re;
            assert!(dip < prev);
            prev = dip;
        }
    }

    #[test]
    fn leakage_numbers() {
        let n = CouplingNetwork::uncalibrated(1e-15, 5e-15, 50.0).unwrap();
        let w = angular(10e9);
        let zc = coupling_impedance(&n, w);
        assert!((zc - 2_652.582_384_864_922).abs() < 1e-6, "{zc}");
        let leak = direct_leakage(&n, w);
        assert!((leak - (100.0 / zc).powi(2)).abs() < 1e-15);
        assert_eq!(direct_leakage(&n, 0.0), 0.0);
        let n2 = CouplingNetwork::uncalibrated(2e-15, 10e-15, 50.0).unwrap();
        assert!((direct_leakage(&n2, w) / leak - 4.0).abs() < 1e-12);
    }

    #[test]
    fn transmission_map_ridge() {
        let params = FluxQubitParams::reference_device();
        let model = RateModel { network: net(), gamma1_nr: 0.0, gamma_phi: 0.0 };
        let flux: Vec<f64> = (-5..=5).map(|k| k as f64 * 0.006).collect();
        let freq: Vec<f64> = (0..=2600).map(|k| 6.5e9 + k as f64 * 1e6).collect();
        let map = transmission_map(&params, &model, &flux, &freq).unwrap();
        let ridge = map.ridge();
        for (dphi, f) in flux.iter().zip(ridge) {
            let expected = crate::spectrum::transition_frequency(&params, FluxBias::at(*dphi).unwrap());
            assert!((f - expected).abs() <= 0.5e6, "{dphi}: {f} vs {expected}");
        }
        let peak = map.values.iter().flatten().cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
        let centre = &map.values[5];
        assert!((centre.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-12);
        // 6.5 GHz is ~230 MHz from the 6.728 GHz line
        assert!(centre[0] < 0.05);
        assert!(transmission_map(&params, &model, &[], &freq).is_err());
    }

    proptest! {
        #[test]
        fn smith_circle(dw in -1e3f64..1e3, ratio in 0.05f64..0.95) {
            let g2 = 1.0;
            let r = AtomRates::new(0.0, 2.0 * ratio * g2, 2.0 * (1.0 - ratio) * g2, 0.0).unwrap();
            let re = weak_coefficients(&r, &net(), dw).r_e;
            prop_assert!(((re - Complex64::new(1.0 - ratio, 0.0)).norm() - ratio).abs() < 1e-9);
            prop_assert!(re.norm() <= 1.0 + 1e-9);
        }

        #[test]
        fn passivity_and_conservation(cc in 0.1f64..10.0, ce in 0.1f64..10.0, dw in -50.0f64..50.0) {
            let n = CouplingNetwork::new(cc * 1e-15, ce * 1e-15, 50.0, 1e-5).unwrap();
            let r = rates_from_network(&n, angular(7e9));
            let p = weak_coefficients(&r, &n, dw * r.gamma2());
            prop_assert!((p.r_c.norm_sqr() + p.t_ce.norm_sqr() - 1.0).abs() < 1e-9);
            prop_assert!((p.r_e.norm_sqr() + p.t_ce.norm_sqr() - 1.0).abs() < 1e-9);
            prop_assert!(p.r_c.norm() <= 1.0 + 1e-9 && p.r_e.norm() <= 1.0 + 1e-9);
        }
    }
}
