//! Source operation: pulse-train excitation, coherent/incoherent emission
//! versus pulse length, single-photon wavepackets and the digitized
//! time-domain measurement.
//!
//! An excited atom radiates W(t) = ħωΓ₁^{c,e}·P₁(t) into each line. After a
//! π-pulse P₁ decays as exp(−Γ₁t), so the emission-line wavepacket carries
//! ħω·Γ₁ᵉ/Γ₁ of energy.

pub mod filter;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{evolve, max_step, AUTO_STEP_FRACTION, pulse_response, AtomRates, BlochState, Drive, DynamicsError, PulseEnvelope, PulsedDrive};
pub use crate::scattering::Line;
use crate::units::HBAR;
pub use filter::LowPassFilter;

/// The train period must exceed this many relaxation times.
pub const MIN_PERIOD_RELAXATIONS: f64 = 5.0;

/// Monte-Carlo repetitions summed sequentially per parallel work item.
const REPETITION_BLOCK: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmissionError {
    #[error("train period {period} s is shorter than {min} s (5/Γ₁)")]
    PeriodTooShort { period: f64, min: f64 },
    #[error("pulse of {duration} s does not fit in a period of {period} s")]
    PulseLongerThanPeriod { duration: f64, period: f64 },
    #[error("{name} is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("frequency grid spans {span} Hz, less than five linewidths ({required} Hz)")]
    GridTooNarrow { span: f64, required: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Identical pulses repeated every `period` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub pulse: PulseEnvelope,
    pub period: f64,
    pub count: usize,
}

impl PulseTrain {
    pub fn new(pulse: PulseEnvelope, period: f64, count: usize) -> Result<Self, EmissionError> {
        if !(period.is_finite() && period > pulse.duration) {
            return Err(EmissionError::PulseLongerThanPeriod { duration: pulse.duration, period });
        }
        if count == 0 {
            return Err(EmissionError::InvalidParameter { name: "count", value: 0.0 });
        }
        Ok(Self { pulse, period, count })
    }

    pub fn record_length(&self) -> f64 {
        self.period * self.count as f64
    }
}

/// Digitizer and averaging settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementChain {
    pub sample_interval: f64,
    /// 3 dB bandwidth of the digital low-pass in Hz; `None` disables it.
    pub filter_bandwidth: Option<f64>,
    /// Additive white Gaussian noise on the amplitude trace, √W per sample.
    pub noise_sigma: f64,
    pub averages: u64,
    pub seed: u64,
}

impl MeasurementChain {
    pub fn validate(&self) -> Result<(), EmissionError> {
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(EmissionError::InvalidParameter { name: "sample_interval", value: self.sample_interval });
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(EmissionError::InvalidParameter { name: "noise_sigma", value: self.noise_sigma });
        }
        if self.averages == 0 {
            return Err(EmissionError::InvalidParameter { name: "averages", value: 0.0 });
        }
        Ok(())
    }

    pub fn filter(&self) -> Result<LowPassFilter, EmissionError> {
        match self.filter_bandwidth {
            Some(b) => LowPassFilter::design(b, self.sample_interval),
            None => Ok(LowPassFilter::identity(self.sample_interval)),
        }
    }
}

/// Power versus time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionTrace {
    pub times: Vec<f64>,
    pub power: Vec<f64>,
}

impl EmissionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// W = ħωΓ₁^{line}·P₁.
pub fn instantaneous_power(rates: &AtomRates, omega: f64, p1: f64, line: Line) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p1));
    let gamma = match line {
        Line::Control => rates.gamma1_c(),
        Line::Emission => rates.gamma1_e(),
    };
    HBAR * omega * gamma * p1
}

/// Energy radiated into `line` by an atom left with population `p1`:
/// ħω·p1·Γ₁^{line}/Γ₁.
pub fn emitted_energy(rates: &AtomRates, omega: f64, p1: f64, line: Line) -> f64 {
    instantaneous_power(rates, omega, p1, line) / rates.gamma1()
}

/// Emission-line wavepacket ħωΓ₁ᵉ·exp(−Γ₁t) of an atom prepared in |1⟩ at t = 0.
pub fn photon_wavepacket(rates: &AtomRates, omega: f64, times: &[f64]) -> EmissionTrace {
    let peak = instantaneous_power(rates, omega, 1.0, Line::Emission);
    let g1 = rates.gamma1();
    EmissionTrace { times: times.to_vec(), power: times.iter().map(|&t| peak * (-g1 * t).exp()).collect() }
}

/// Lorentzian line of the emitted wavepacket, centred on `center` Hz with
/// FWHM 2Γ₂/2π, normalized so its integral over frequency equals `energy`.
pub fn wavepacket_spectrum(rates: &AtomRates, center: f64, frequencies: &[f64], energy: f64) -> Result<Vec<f64>, EmissionError> {
    let half_width = rates.gamma2() / std::f64::consts::TAU;
    let (lo, hi) = frequencies
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    let required = 5.0 * 2.0 * half_width;
    if !(hi - lo >= required) {
        return Err(EmissionError::GridTooNarrow { span: hi - lo, required });
    }
    Ok(frequencies
        .iter()
        .map(|&f| energy * half_width / std::f64::consts::PI / ((f - center).powi(2) + half_width * half_width))
        .collect())
}

/// One point of a Rabi sweep: period averages for a given pulse length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiPoint {
    pub duration: f64,
    /// Period-averaged ⟨σ⁻⟩.
    pub coherent: Complex64,
    /// |⟨σ̄⁻⟩|, proportional to the coherently emitted field.
    pub coherent_amp: f64,
    /// Period average of P₁ − |⟨σ⁻⟩|².
    pub incoherent: f64,
    /// Period average of P₁.
    pub population: f64,
}

/// Sweeps the pulse length of a train with Rabi frequency `rabi` (rad/s).
///
/// Each period starts from the ground state, which holds when T ≫ 1/Γ₁; the
/// sweep is rejected with [`EmissionError::PeriodTooShort`] if T < 5/Γ₁.
pub fn rabi_sweep(
    rates: &AtomRates,
    rabi: f64,
    durations: &[f64],
    period: f64,
    detuning: f64,
    carrier: f64,
) -> Result<Vec<RabiPoint>, EmissionError> {
    let min = MIN_PERIOD_RELAXATIONS / rates.gamma1();
    if !(period >= min) {
        return Err(EmissionError::PeriodTooShort { period, min });
    }
    durations
        .par_iter()
        .map(|&duration| {
            let pulse = PulseEnvelope::rectangular(duration, rabi)?;
            if duration >= period {
                return Err(EmissionError::PulseLongerThanPeriod { duration, period });
            }
            let envelope = PulsedDrive { pulse, detuning, carrier };
            let on = AUTO_STEP_FRACTION * max_step(rates, &Drive::new(rabi, detuning, carrier));
            let off = AUTO_STEP_FRACTION * max_step(rates, &Drive::new(0.0, detuning, carrier));
            let driven = evolve(BlochState::ground(), rates, &envelope, (0.0, duration), on)?;
            let free = evolve(driven.last(), rates, &envelope, (duration, period), off.min(period))?;
            let coherent = driven.integrate(BlochState::sigma_minus) + free.integrate(BlochState::sigma_minus);
            let pop = driven.integrate(BlochState::population) + free.integrate(BlochState::population);
            let incoherent_part = |s: &BlochState| s.population() - s.sigma_minus().norm_sqr();
            let incoherent = driven.integrate(incoherent_part) + free.integrate(incoherent_part);
            let coherent = coherent / period;
            Ok(RabiPoint {
                duration,
                coherent,
                coherent_amp: coherent.norm(),
                incoherent: incoherent / period,
                population: pop / period,
            })
        })
        .collect()
}

/// Sample times 0, Δ, 2Δ, … covering one record of the train.
pub fn sample_times(train: &PulseTrain, chain: &MeasurementChain) -> Vec<f64> {
    let n = (train.record_length() / chain.sample_interval + 1e-9).floor() as usize;
    (0..n).map(|j| j as f64 * chain.sample_interval).collect()
}

/// Noise-free amplitude (√W) on the emission line: each pulse leaves P₁ from
/// [`pulse_response`] at its end, followed by a decay √(ħωΓ₁ᵉP₁)·exp(−Γ₁t/2)
/// until the next pulse ends.
pub fn emission_amplitude(
    rates: &AtomRates,
    omega: f64,
    train: &PulseTrain,
    times: &[f64],
    p1: f64,
) -> Vec<f64> {
    let peak = instantaneous_power(rates, omega, p1, Line::Emission).sqrt();
    let g1 = rates.gamma1();
    let dt = train.pulse.duration;
    times
        .iter()
        .map(|&t| {
            let k = ((t - dt) / train.period).floor();
            if k < 0.0 {
                return 0.0;
            }
            let since = t - (k * train.period + dt);
            peak * (-0.5 * g1 * since).exp()
        })
        .collect()
}

/// Ideal measured trace: the filtered amplitude, squared.
pub fn filtered_expectation(
    rates: &AtomRates,
    omega: f64,
    train: &PulseTrain,
    chain: &MeasurementChain,
    detuning: f64,
) -> Result<EmissionTrace, EmissionError> {
    chain.validate()?;
    let p1 = pulse_response(rates, &train.pulse, detuning, omega / std::f64::consts::TAU)?.population();
    let times = sample_times(train, chain);
    let amp = chain.filter()?.apply(&emission_amplitude(rates, omega, train, &times, p1));
    Ok(EmissionTrace { power: amp.iter().map(|a| a * a).collect(), times })
}

/// Standard deviation per sample of the averaged on−off trace around
/// [`filtered_expectation`]: √((4s²v + 4v²)/N) with s the filtered amplitude
/// and v the filtered noise variance at that sample.
pub fn predicted_residual_sigma(expected: &EmissionTrace, filter: &LowPassFilter, chain: &MeasurementChain) -> Vec<f64> {
    let n = expected.len();
    let half = filter.taps().len() / 2;
    let sigma2 = chain.noise_sigma * chain.noise_sigma;
    (0..n)
        .map(|i| {
            let v: f64 = filter
                .taps()
                .iter()
                .enumerate()
                .filter(|(j, _)| {
                    let src = i as isize + half as isize - *j as isize;
                    (0..n as isize).contains(&src)
                })
                .map(|(_, h)| h * h)
                .sum::<f64>()
                * sigma2;
            let s2 = expected.power[i];
            ((4.0 * s2 * v + 4.0 * v * v) / chain.averages as f64).sqrt()
        })
        .collect()
}

/// RNG for repetition `index`: ChaCha8 keyed by the master seed, one stream per
/// repetition.
pub fn repetition_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulated averaged time trace.
///
/// Every repetition digitizes the emission amplitude plus white Gaussian
/// noise and an idle (noise-only) record, filters both, squares them and
/// subtracts. The differences are averaged over `chain.averages`
/// repetitions. Results depend only on the seed: repetition `k` always draws
/// from stream `k`, and partial sums are combined in index order.
pub fn time_trace_experiment(
    rates: &AtomRates,
    omega: f64,
    train: &PulseTrain,
    chain: &MeasurementChain,
    detuning: f64,
) -> Result<EmissionTrace, EmissionError> {
    chain.validate()?;
    let filter = chain.filter()?;
    let p1 = pulse_response(rates, &train.pulse, detuning, omega / std::f64::consts::TAU)?.population();
    let times = sample_times(train, chain);
    let signal = filter.apply(&emission_amplitude(rates, omega, train, &times, p1));
    let n = times.len();
    if chain.noise_sigma == 0.0 {
        return Ok(EmissionTrace { power: signal.iter().map(|a| a * a).collect(), times });
    }

    let blocks = chain.averages.div_ceil(REPETITION_BLOCK as u64);
    let partials: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; n];
            let mut on = vec![0.0; n];
            let mut idle = vec![0.0; n];
            let mut on_f = vec![0.0; n];
            let mut idle_f = vec![0.0; n];
            let first = b * REPETITION_BLOCK as u64;
            let last = (first + REPETITION_BLOCK as u64).min(chain.averages);
            for rep in first..last {
                let mut rng = repetition_rng(chain.seed, rep);
                for x in on.iter_mut().chain(idle.iter_mut()) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *x = chain.noise_sigma * z;
                }
                filter.apply_into(&on, &mut on_f);
                filter.apply_into(&idle, &mut idle_f);
                for i in 0..n {
                    let y = signal[i] + on_f[i];
                    acc[i] += y * y - idle_f[i] * idle_f[i];
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    let scale = 1.0 / chain.averages as f64;
    Ok(EmissionTrace { power: total.into_iter().map(|v| v * scale).collect(), times })
}
