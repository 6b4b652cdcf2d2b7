//! Driven, damped two-level atom in the rotating frame.
//!
//! The Bloch vector s = (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) obeys
//!
//! ```text
//! ṡx = −δω·sy − Γ₂·sx
//! ṡy =  δω·sx − Ω·sz − Γ₂·sy
//! ṡz =  Ω·sy − Γ₁·(sz − 1)
//! ```
//!
//! with sz = +1 the ground state, P₁ = (1 − sz)/2 and ⟨σ⁻⟩ = (sx + i·sy)/2.
//! The rotation sense is fixed so that the stationary point is exactly
//! [`steady_state_sigma_minus`]; `stationary_point_matches_closed_form` below
//! pins it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integration step must not exceed the fastest time scale divided by this.
pub const STEP_DIVISOR: f64 = 20.0;

/// Automatic step selection uses this fraction of [`max_step`].
pub const AUTO_STEP_FRACTION: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("rate {name} must be non-negative and finite, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("step {dt} s exceeds the stability bound {bound} s at t = {t} s")]
    StepTooLarge { dt: f64, bound: f64, t: f64 },
    #[error("time span [{0}, {1}] is empty or not finite")]
    InvalidSpan(f64, f64),
    #[error("pulse duration must be non-negative, got {0} s")]
    InvalidDuration(f64),
}

/// Decoherence budget in rad/s: radiative decay into the control and emission
/// lines, non-radiative decay and pure dephasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRates {
    gamma1_c: f64,
    gamma1_e: f64,
    gamma1_nr: f64,
    gamma_phi: f64,
}

impl AtomRates {
    pub fn new(gamma1_c: f64, gamma1_e: f64, gamma1_nr: f64, gamma_phi: f64) -> Result<Self, DynamicsError> {
        for (name, value) in [
            ("gamma1_c", gamma1_c),
            ("gamma1_e", gamma1_e),
            ("gamma1_nr", gamma1_nr),
            ("gamma_phi", gamma_phi),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DynamicsError::InvalidRate { name, value });
            }
        }
        Ok(Self { gamma1_c, gamma1_e, gamma1_nr, gamma_phi })
    }

    /// Purely radiative rates (no non-radiative decay, no dephasing).
    pub fn radiative(gamma1_c: f64, gamma1_e: f64) -> Result<Self, DynamicsError> {
        Self::new(gamma1_c, gamma1_e, 0.0, 0.0)
    }

    /// All rates zero: coherent evolution only. Steady-state quantities are
    /// undefined for this set.
    pub fn lossless() -> Self {
        Self { gamma1_c: 0.0, gamma1_e: 0.0, gamma1_nr: 0.0, gamma_phi: 0.0 }
    }

    pub fn with_nonradiative(self, gamma1_nr: f64) -> Result<Self, DynamicsError> {
        Self::new(self.gamma1_c, self.gamma1_e, gamma1_nr, self.gamma_phi)
    }

    pub fn with_dephasing(self, gamma_phi: f64) -> Result<Self, DynamicsError> {
        Self::new(self.gamma1_c, self.gamma1_e, self.gamma1_nr, gamma_phi)
    }

    pub fn gamma1_c(&self) -> f64 {
        self.gamma1_c
    }

    pub fn gamma1_e(&self) -> f64 {
        self.gamma1_e
    }

    pub fn gamma1_nr(&self) -> f64 {
        self.gamma1_nr
    }

    pub fn gamma_phi(&self) -> f64 {
        self.gamma_phi
    }

    /// Γ₁ = Γ₁ᶜ + Γ₁ᵉ + Γ₁ⁿʳ.
    pub fn gamma1(&self) -> f64 {
        self.gamma1_c + self.gamma1_e + self.gamma1_nr
    }

    /// Γ₂ = Γ₁/2 + γ.
    pub fn gamma2(&self) -> f64 {
        0.5 * self.gamma1() + self.gamma_phi
    }

    pub fn is_dissipative(&self) -> bool {
        self.gamma1() > 0.0
    }

    /// Probability Γ₁ᵉ/Γ₁ that an excitation leaves through the emission line.
    pub fn emission_efficiency(&self) -> f64 {
        self.gamma1_e / self.gamma1()
    }
}

/// Rotating-frame drive: Rabi frequency Ω and detuning δω = ω − ω₁₀ in rad/s,
/// carrier ω/2π in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub rabi: f64,
    pub detuning: f64,
    pub carrier: f64,
}

impl Drive {
    pub fn new(rabi: f64, detuning: f64, carrier: f64) -> Self {
        debug_assert!(carrier > 0.0, "carrier frequency must be positive");
        Self { rabi, detuning, carrier }
    }

    pub fn resonant(rabi: f64, carrier: f64) -> Self {
        Self::new(rabi, 0.0, carrier)
    }

    pub fn off(self) -> Self {
        Self { rabi: 0.0, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochState {
    pub fn new(sx: f64, sy: f64, sz: f64) -> Self {
        Self { sx, sy, sz }
    }

    /// |0⟩, sz = +1.
    pub fn ground() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    /// |1⟩, sz = −1.
    pub fn excited() -> Self {
        Self::new(0.0, 0.0, -1.0)
    }

    /// ⟨σ⁻⟩ = (sx + i·sy)/2.
    pub fn sigma_minus(&self) -> Complex64 {
        Complex64::new(self.sx, self.sy) * 0.5
    }

    /// Excited-state population P₁ = (1 − sz)/2.
    pub fn population(&self) -> f64 {
        0.5 * (1.0 - self.sz)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }

    pub fn distance(&self, other: &BlochState) -> f64 {
        ((self.sx - other.sx).powi(2) + (self.sy - other.sy).powi(2) + (self.sz - other.sz).powi(2)).sqrt()
    }

    fn axpy(&self, h: f64, d: &BlochState) -> BlochState {
        BlochState::new(self.sx + h * d.sx, self.sy + h * d.sy, self.sz + h * d.sz)
    }
}

/// Closed-form stationary ⟨σ⁻⟩ under constant drive:
/// −i·(Ω/2Γ₂)·(1 + iδω/Γ₂) / (1 + (δω/Γ₂)² + Ω²/Γ₁Γ₂).
pub fn steady_state_sigma_minus(rates: &AtomRates, drive: &Drive) -> Complex64 {
    let g1 = rates.gamma1();
    let g2 = rates.gamma2();
    let x = drive.detuning / g2;
    let denom = 1.0 + x * x + drive.rabi * drive.rabi / (g1 * g2);
    -Complex64::i() * (drive.rabi / (2.0 * g2)) * Complex64::new(1.0, x) / denom
}

/// Closed-form stationary excited-state population.
pub fn steady_state_population(rates: &AtomRates, drive: &Drive) -> f64 {
    let g1 = rates.gamma1();
    let g2 = rates.gamma2();
    let x = drive.detuning / g2;
    let sat = drive.rabi * drive.rabi / (g1 * g2);
    sat / (2.0 * (1.0 + x * x + sat))
}

/// Full stationary Bloch vector.
pub fn steady_state(rates: &AtomRates, drive: &Drive) -> BlochState {
    let sm = steady_state_sigma_minus(rates, drive);
    BlochState::new(2.0 * sm.re, 2.0 * sm.im, 1.0 - 2.0 * steady_state_population(rates, drive))
}

/// Time derivative of the Bloch vector.
pub fn bloch_derivative(s: &BlochState, rates: &AtomRates, drive: &Drive) -> BlochState {
    let g1 = rates.gamma1();
    let g2 = rates.gamma2();
    let (om, dw) = (drive.rabi, drive.detuning);
    BlochState::new(
        -dw * s.sy - g2 * s.sx,
        dw * s.sx - om * s.sz - g2 * s.sy,
        om * s.sy - g1 * (s.sz - 1.0),
    )
}

/// Largest admissible step: min(1/Γ₁, 1/Γ₂, 1/Ω, 1/|δω|)/20, ignoring zero rates.
pub fn max_step(rates: &AtomRates, drive: &Drive) -> f64 {
    let fastest = [rates.gamma1(), rates.gamma2(), drive.rabi.abs(), drive.detuning.abs()]
        .into_iter()
        .fold(0.0, f64::max);
    if fastest == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (fastest * STEP_DIVISOR)
    }
}

/// Time-dependent drive for [`evolve`].
///
/// Implementors with discontinuities list them in `breakpoints`; the
/// integrator lands a step on each one and evaluates the drive from the left
/// at the end of the step that reaches it.
pub trait Envelope {
    fn drive_at(&self, t: f64) -> Drive;

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F> Envelope for F
where
    F: Fn(f64) -> Drive,
{
    fn drive_at(&self, t: f64) -> Drive {
        self(t)
    }
}

/// Constant drive for all times.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDrive(pub Drive);

impl Envelope for ConstantDrive {
    fn drive_at(&self, _t: f64) -> Drive {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Rectangular,
}

/// Excitation pulse of length Δt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    pub shape: PulseShape,
    pub duration: f64,
    pub rabi_peak: f64,
}

impl PulseEnvelope {
    pub fn rectangular(duration: f64, rabi_peak: f64) -> Result<Self, DynamicsError> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(DynamicsError::InvalidDuration(duration));
        }
        Ok(Self { shape: PulseShape::Rectangular, duration, rabi_peak })
    }

    /// Rectangular pulse of area π.
    pub fn pi_pulse(rabi_peak: f64) -> Self {
        Self { shape: PulseShape::Rectangular, duration: std::f64::consts::PI / rabi_peak, rabi_peak }
    }

    /// Rabi frequency at time `t` after the pulse starts.
    pub fn rabi_at(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Rectangular => {
                if (0.0..self.duration).contains(&t) {
                    self.rabi_peak
                } else {
                    0.0
                }
            }
        }
    }
}

/// A pulse starting at t = 0, free evolution afterwards.
#[derive(Debug, Clone, Copy)]
pub struct PulsedDrive {
    pub pulse: PulseEnvelope,
    pub detuning: f64,
    pub carrier: f64,
}

impl Envelope for PulsedDrive {
    fn drive_at(&self, t: f64) -> Drive {
        Drive::new(self.pulse.rabi_at(t), self.detuning, self.carrier)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, self.pulse.duration]
    }
}

/// Sampled Bloch-vector time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
}

impl Trajectory {
    pub fn last(&self) -> BlochState {
        *self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.states.iter().map(BlochState::population).collect()
    }

    /// Trapezoidal integral of `f(state)` over the trajectory.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        F: Fn(&BlochState) -> T,
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default + Copy,
    {
        let mut acc = T::default();
        let mut prev = f(&self.states[0]);
        for k in 1..self.times.len() {
            let cur = f(&self.states[k]);
            acc = acc + (prev + cur) * (0.5 * (self.times[k] - self.times[k - 1]));
            prev = cur;
        }
        acc
    }
}

fn rk4_step(s: &BlochState, rates: &AtomRates, d_start: &Drive, d_mid: &Drive, d_end: &Drive, h: f64) -> BlochState {
    let k1 = bloch_derivative(s, rates, d_start);
    let k2 = bloch_derivative(&s.axpy(0.5 * h, &k1), rates, d_mid);
    let k3 = bloch_derivative(&s.axpy(0.5 * h, &k2), rates, d_mid);
    let k4 = bloch_derivative(&s.axpy(h, &k3), rates, d_end);
    BlochState::new(
        s.sx + h / 6.0 * (k1.sx + 2.0 * k2.sx + 2.0 * k3.sx + k4.sx),
        s.sy + h / 6.0 * (k1.sy + 2.0 * k2.sy + 2.0 * k3.sy + k4.sy),
        s.sz + h / 6.0 * (k1.sz + 2.0 * k2.sz + 2.0 * k3.sz + k4.sz),
    )
}

/// Integrates the Bloch equations over `t_span` with classical fixed-step RK4.
///
/// Steps are at most `dt` and are shortened so that every envelope
/// breakpoint and both ends of the span are hit exactly. A step fails with
/// [`DynamicsError::StepTooLarge`] if `dt` exceeds [`max_step`] for the drive
/// at its start.
pub fn evolve<E: Envelope + ?Sized>(
    initial: BlochState,
    rates: &AtomRates,
    envelope: &E,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory, DynamicsError> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(DynamicsError::InvalidSpan(t0, t1));
    }
    if !(dt > 0.0) {
        return Err(DynamicsError::StepTooLarge { dt, bound: f64::NAN, t: t0 });
    }
    let mut cuts: Vec<f64> = envelope.breakpoints().into_iter().filter(|&b| b > t0 && b < t1).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(t1);

    let mut times = vec![t0];
    let mut states = vec![initial];
    let mut s = initial;
    let mut a = t0;
    for &b in &cuts {
        let n = (((b - a) / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for k in 0..n {
            let t = a + h * k as f64;
            let t_end = if k + 1 == n { b } else { a + h * (k + 1) as f64 };
            let d_start = envelope.drive_at(t);
            let bound = max_step(rates, &d_start);
            if dt > bound * (1.0 + 1e-12) {
                return Err(DynamicsError::StepTooLarge { dt, bound, t });
            }
            let d_mid = envelope.drive_at(t + 0.5 * (t_end - t));
            // left limit at a breakpoint
            let d_end = envelope.drive_at(if k + 1 == n { b.next_down() } else { t_end });
            s = rk4_step(&s, rates, &d_start, &d_mid, &d_end, t_end - t);
            times.push(t_end);
            states.push(s);
        }
        a = b;
    }
    Ok(Trajectory { times, states })
}

/// [`evolve`] under constant `drive` with an automatically chosen step.
pub fn evolve_constant(
    initial: BlochState,
    rates: &AtomRates,
    drive: Drive,
    duration: f64,
) -> Result<Trajectory, DynamicsError> {
    let dt = (AUTO_STEP_FRACTION * max_step(rates, &drive)).min(duration.max(f64::MIN_POSITIVE));
    evolve(initial, rates, &ConstantDrive(drive), (0.0, duration), dt)
}

/// Bloch state at the end of one pulse applied to the ground state.
pub fn pulse_response(
    rates: &AtomRates,
    pulse: &PulseEnvelope,
    detuning: f64,
    carrier: f64,
) -> Result<BlochState, DynamicsError> {
    if pulse.duration == 0.0 {
        return Ok(BlochState::ground());
    }
    let drive = Drive::new(pulse.rabi_peak, detuning, carrier);
    Ok(evolve_constant(BlochState::ground(), rates, drive, pulse.duration)?.last())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::angular;
    use std::f64::consts::PI;

    const CARRIER: f64 = 6.728e9;

    fn paper_rates() -> AtomRates {
        // Γ₁/2π = 12.5 MHz split 1:25 between the lines, γ = 0
        let g1 = angular(12.5e6);
        AtomRates::radiative(g1 / 26.0, g1 * 25.0 / 26.0).unwrap()
    }

    #[test]
    fn derived_rates() {
        let r = AtomRates::new(1.0, 2.0, 3.0, 0.5).unwrap();
        assert_eq!(r.gamma1(), 6.0);
        assert_eq!(r.gamma2(), 3.5);
        assert!(AtomRates::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(AtomRates::new(0.0, f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn undriven_steady_state_is_ground() {
        let d = Drive::resonant(0.0, CARRIER);
        assert_eq!(steady_state_sigma_minus(&paper_rates(), &d), Complex64::new(0.0, 0.0));
        assert_eq!(steady_state_population(&paper_rates(), &d), 0.0);
    }

    #[test]
    fn weak_resonant_sigma_minus() {
        // Ω/Γ₂ = 0.1/6.25 = 0.016, saturation term 1.28e-4:
        // ⟨σ⁻⟩ = −i·0.008/(1 + 1.28e-4) = −0.007 998 976 131 i
        let d = Drive::resonant(angular(0.1e6), CARRIER);
        let sm = steady_state_sigma_minus(&paper_rates(), &d);
        assert!(sm.re.abs() < 1e-18);
        assert!((sm.im + 0.007_998_976_131_055_225).abs() < 1e-15, "{sm}");
    }

    #[test]
    fn saturation_limits() {
        let r = paper_rates();
        let d = Drive::new(1e15, 3e7, CARRIER);
        assert!(steady_state_sigma_minus(&r, &d).norm() < 1e-6);
        assert!((steady_state_population(&r, &d) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quarter_population_point() {
        let r = paper_rates();
        let d = Drive::resonant((r.gamma1() * r.gamma2()).sqrt(), CARRIER);
        assert!((steady_state_population(&r, &d) - 0.25).abs() < 1e-15);
        let tr = evolve_constant(BlochState::ground(), &r, d, 60.0 / r.gamma1()).unwrap();
        assert!((tr.last().population() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn stationary_point_matches_closed_form() {
        let r = paper_rates().with_dephasing(angular(2.0e6)).unwrap();
        for &(om, dw) in &[(0.7, 0.0), (1.3, 2.0), (2.0, -3.5), (0.01, 1.0)] {
            let d = Drive::new(om * r.gamma1(), dw * r.gamma2(), CARRIER);
            let s = steady_state(&r, &d);
            let ds = bloch_derivative(&s, &r, &d);
            let scale = r.gamma1();
            assert!(ds.sx.abs() / scale < 1e-14 && ds.sy.abs() / scale < 1e-14 && ds.sz.abs() / scale < 1e-14, "{ds:?}");
        }
    }

    #[test]
    fn free_decay_from_excited() {
        let r = paper_rates();
        let g1 = r.gamma1();
        let tr = evolve_constant(BlochState::excited(), &r, Drive::resonant(0.0, CARRIER), 5.0 / g1).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((s.population() - (-g1 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn ground_is_fixed_point() {
        let tr = evolve_constant(BlochState::ground(), &paper_rates(), Drive::resonant(0.0, CARRIER), 1e-6).unwrap();
        assert!(tr.states.iter().all(|s| *s == BlochState::ground()));
    }

    #[test]
    fn ideal_pi_pulse() {
        let om = angular(76.923e6);
        let pulse = PulseEnvelope::rectangular(PI / om, om).unwrap();
        let s = pulse_response(&AtomRates::lossless(), &pulse, 0.0, CARRIER).unwrap();
        assert!((s.population() - 1.0).abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn ideal_half_pi_pulse() {
        let om = angular(50e6);
        let pulse = PulseEnvelope::rectangular(0.5 * PI / om, om).unwrap();
        let s = pulse_response(&AtomRates::lossless(), &pulse, 0.0, CARRIER).unwrap();
        assert!(s.sz.abs() < 1e-8);
        assert!((s.sigma_minus().norm() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn zero_length_pulse() {
        let pulse = PulseEnvelope::rectangular(0.0, 1e9).unwrap();
        assert_eq!(pulse_response(&paper_rates(), &pulse, 0.0, CARRIER).unwrap(), BlochState::ground());
        assert!(PulseEnvelope::rectangular(-1e-9, 1e9).is_err());
    }

    #[test]
    fn step_bound_enforced() {
        let r = paper_rates();
        let d = Drive::resonant(angular(50e6), CARRIER);
        let bound = max_step(&r, &d);
        let err = evolve(BlochState::ground(), &r, &ConstantDrive(d), (0.0, 1e-7), bound * 1.5).unwrap_err();
        assert!(matches!(err, DynamicsError::StepTooLarge { .. }));
        assert!(evolve(BlochState::ground(), &r, &ConstantDrive(d), (0.0, 1e-7), bound).is_ok());
    }

    #[test]
    fn breakpoints_are_hit() {
        let r = paper_rates();
        let om = angular(76.923e6);
        let env = PulsedDrive { pulse: PulseEnvelope::pi_pulse(om), detuning: 0.0, carrier: CARRIER };
        let dt = AUTO_STEP_FRACTION * max_step(&r, &Drive::resonant(om, CARRIER));
        let tr = evolve(BlochState::ground(), &r, &env, (0.0, 3e-8), dt).unwrap();
        assert!(tr.times.contains(&env.pulse.duration));
        let k = tr.times.iter().position(|&t| t == env.pulse.duration).unwrap();
        let single = pulse_response(&r, &env.pulse, 0.0, CARRIER).unwrap();
        assert!(tr.states[k].distance(&single) < 1e-9);
    }

    #[test]
    fn weak_drive_linearity() {
        let r = paper_rates();
        let base = (r.gamma1() * r.gamma2()).sqrt();
        let reference = steady_state_sigma_minus(&r, &Drive::new(1e-4 * base, 0.3 * r.gamma2(), CARRIER)).norm() / (1e-4 * base);
        for k in [1e-3, 3e-3, 1e-2] {
            let om = k * base;
            let ratio = steady_state_sigma_minus(&r, &Drive::new(om, 0.3 * r.gamma2(), CARRIER)).norm() / om;
            assert!((ratio / reference - 1.0).abs() < 0.01);
        }
    }
}
