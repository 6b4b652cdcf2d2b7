//! Zero-phase FIR low-pass used by the digitizer model.
//!
//! Windowed-sinc design: Hamming window over 2M+1 taps with M = ⌈2/(B·Δt)⌉,
//! cutoff tuned by bisection so that the magnitude response is exactly
//! 1/√2 at the requested bandwidth B, taps normalized to unit DC gain.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use super::EmissionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowPassFilter {
    taps: Vec<f64>,
    sample_interval: f64,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn windowed_sinc(cutoff_norm: f64, half: usize) -> Vec<f64> {
    let n = 2 * half + 1;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let k = i as f64 - half as f64;
            let w = 0.54 + 0.46 * (PI * k / (half as f64 + 1.0)).cos();
            w * 2.0 * cutoff_norm * sinc(2.0 * cutoff_norm * k)
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Magnitude response of a symmetric tap set at normalized frequency f·Δt.
fn magnitude(taps: &[f64], f_norm: f64) -> f64 {
    let half = (taps.len() / 2) as f64;
    taps.iter()
        .enumerate()
        .map(|(i, h)| h * (TAU * f_norm * (i as f64 - half)).cos())
        .sum::<f64>()
        .abs()
}

impl LowPassFilter {
    /// Pass-through filter (infinite bandwidth).
    pub fn identity(sample_interval: f64) -> Self {
        Self { taps: vec![1.0], sample_interval }
    }

    /// Low-pass with its 3 dB point at `bandwidth` Hz. Bandwidths at or above
    /// the Nyquist frequency give the identity.
    pub fn design(bandwidth: f64, sample_interval: f64) -> Result<Self, EmissionError> {
        if !(sample_interval.is_finite() && sample_interval > 0.0) {
            return Err(EmissionError::InvalidParameter { name: "sample_interval", value: sample_interval });
        }
        if !(bandwidth > 0.0) || bandwidth.is_nan() {
            return Err(EmissionError::InvalidParameter { name: "filter_bandwidth", value: bandwidth });
        }
        let b_norm = bandwidth * sample_interval;
        if b_norm >= 0.5 {
            return Ok(Self::identity(sample_interval));
        }
        let half = (2.0 / b_norm).ceil() as usize;
        let (mut lo, mut hi) = (1e-6, 0.5);
        if magnitude(&windowed_sinc(hi, half), b_norm) < FRAC_1_SQRT_2 {
            return Ok(Self::identity(sample_interval));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if magnitude(&windowed_sinc(mid, half), b_norm) < FRAC_1_SQRT_2 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(Self { taps: windowed_sinc(0.5 * (lo + hi), half), sample_interval })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn is_identity(&self) -> bool {
        self.taps.len() == 1
    }

    /// |H(f)| at `frequency` Hz.
    pub fn response(&self, frequency: f64) -> f64 {
        magnitude(&self.taps, frequency * self.sample_interval)
    }

    /// Σh², the variance gain for white noise.
    pub fn noise_gain(&self) -> f64 {
        self.taps.iter().map(|h| h * h).sum()
    }

    /// Centered convolution, zero padding outside the record; output has the
    /// input length.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; input.len()];
        self.apply_into(input, &mut out);
        out
    }

    pub fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        let n = input.len() as isize;
        let half = (self.taps.len() / 2) as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let i = i as isize;
            let mut acc = 0.0;
            for (j, h) in self.taps.iter().enumerate() {
                let src = i + half - j as isize;
                if (0..n).contains(&src) {
                    acc += h * input[src as usize];
                }
            }
            *o = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_db_point() {
        let f = LowPassFilter::design(30e6, 4e-9).unwrap();
        assert!((f.response(30e6) - FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((f.response(0.0) - 1.0).abs() < 1e-12);
        assert!(f.response(60e6) < 0.2);
        let s: f64 = f.taps().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        let n = f.taps().len();
        for k in 0..n {
            assert!((f.taps()[k] - f.taps()[n - 1 - k]).abs() < 1e-15);
        }
    }

    #[test]
    fn wide_band_is_identity() {
        let f = LowPassFilter::design(1e12, 4e-9).unwrap();
        assert!(f.is_identity());
        let x = [0.3, -1.0, 2.5, 7.0];
        assert_eq!(f.apply(&x), x.to_vec());
    }

    #[test]
    fn dc_is_preserved_in_the_interior() {
        let f = LowPassFilter::design(30e6, 4e-9).unwrap();
        let x = vec![2.0; 200];
        let y = f.apply(&x);
        let half = f.taps().len() / 2;
        for v in &y[half..200 - half] {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LowPassFilter::design(0.0, 4e-9).is_err());
        assert!(LowPassFilter::design(30e6, 0.0).is_err());
    }
}
