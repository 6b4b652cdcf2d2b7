//! Fitting and calibration procedures used to characterize a device from its
//! spectra, Smith-chart traces and Rabi sweeps.

mod calibration;
mod circle;
mod efficiency;
mod lorentzian;

pub use calibration::{calibrate_pi_pulse, local_maxima, PiPulseCalibration};
pub use circle::{fit_circle, CircleFit};
pub use efficiency::{
    dephasing_for_bound, efficiency_bound_from_radius, efficiency_sweep, reflection_sweep, DephasingBump,
    DephasingModel, EfficiencyPoint, SWEEP_HALF_SPAN, SWEEP_POINTS,
};
pub use lorentzian::{fit_lorentzian, lorentzian, LorentzianFit};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scattering::ScatteringError;
use crate::spectrum::SpectrumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("data has no interior peak (monotone series)")]
    NoPeak,
    #[error("fit did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("points are collinear; no unique circle")]
    Degenerate,
    #[error("incoherent power has no interior maximum over the sweep")]
    NoOscillation,
    #[error("{name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("input series have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

/// A fit result together with a digest of the data it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord<T> {
    pub kind: String,
    pub input_sha256: String,
    pub result: T,
}

impl<T> FitRecord<T> {
    pub fn new(kind: &str, inputs: &[&[f64]], result: T) -> Self {
        Self { kind: kind.to_owned(), input_sha256: digest_series(inputs), result }
    }

    pub fn for_points(kind: &str, points: &[Complex64], result: T) -> Self {
        let flat: Vec<f64> = points.iter().flat_map(|z| [z.re, z.im]).collect();
        Self::new(kind, &[&flat], result)
    }
}

/// SHA-256 over the little-endian bit patterns of every value, series by series.
pub fn digest_series(series: &[&[f64]]) -> String {
    let mut h = Sha256::new();
    for s in series {
        h.update((s.len() as u64).to_le_bytes());
        for v in s.iter() {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}
