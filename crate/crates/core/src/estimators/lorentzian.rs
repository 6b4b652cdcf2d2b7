use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::EstimatorError;

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

/// offset + amplitude / (1 + (2(f − center)/fwhm)²), all in the caller's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual_rms: f64,
}

impl LorentzianFit {
    pub fn eval(&self, f: f64) -> f64 {
        lorentzian(f, self.center, self.fwhm, self.amplitude, self.offset)
    }
}

pub fn lorentzian(f: f64, center: f64, fwhm: f64, amplitude: f64, offset: f64) -> f64 {
    let u = 2.0 * (f - center) / fwhm;
    offset + amplitude / (1.0 + u * u)
}

fn is_monotone(y: &[f64]) -> bool {
    y.windows(2).all(|w| w[1] >= w[0]) || y.windows(2).all(|w| w[1] <= w[0])
}

/// Half-maximum crossing walking from `peak` in direction `step`.
fn crossing(x: &[f64], y: &[f64], peak: usize, level: f64, forward: bool) -> Option<f64> {
    let mut k = peak;
    loop {
        let next = if forward { k.checked_add(1).filter(|&n| n < x.len())? } else { k.checked_sub(1)? };
        if y[next] <= level {
            let t = (y[k] - level) / (y[k] - y[next]);
            return Some(x[k] + t * (x[next] - x[k]));
        }
        k = next;
    }
}

/// Damped Gauss–Newton (Levenberg–Marquardt) least-squares Lorentzian fit.
///
/// Starts from the highest sample and its half-maximum crossings; iterates
/// until the relative parameter step falls below 1e-10.
pub fn fit_lorentzian(freq: &[f64], power: &[f64]) -> Result<LorentzianFit, EstimatorError> {
    if freq.len() != power.len() {
        return Err(EstimatorError::LengthMismatch(freq.len(), power.len()));
    }
    if freq.len() < 5 {
        return Err(EstimatorError::InsufficientData { needed: 5, got: freq.len() });
    }
    let mut order: Vec<usize> = (0..freq.len()).collect();
    order.sort_by(|&a, &b| freq[a].total_cmp(&freq[b]));
    let x: Vec<f64> = order.iter().map(|&i| freq[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| power[i]).collect();
    if is_monotone(&y) {
        return Err(EstimatorError::NoPeak);
    }

    let peak = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
    let floor = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let level = 0.5 * (y[peak] + floor);
    let span = x[x.len() - 1] - x[0];
    let width = match (crossing(&x, &y, peak, level, false), crossing(&x, &y, peak, level, true)) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[peak] - l),
        (None, Some(r)) => 2.0 * (r - x[peak]),
        (None, None) => 0.5 * span,
    };
    let width = if width > 0.0 { width } else { span / x.len() as f64 };

    // work in units of the initial width around the peak, and of the peak height
    let x_ref = x[peak];
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xs: Vec<f64> = x.iter().map(|v| (v - x_ref) / width).collect();
    let ys: Vec<f64> = y.iter().map(|v| v / y_scale).collect();

    let residuals = |p: &Vector4<f64>| -> Vec<f64> {
        xs.iter().zip(&ys).map(|(&xi, &yi)| lorentzian(xi, p[0], p[1], p[2], p[3]) - yi).collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut p = Vector4::new(0.0, 1.0, (y[peak] - floor) / y_scale, floor / y_scale);
    let mut r = residuals(&p);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&xi, &ri) in xs.iter().zip(&r) {
            let u = 2.0 * (xi - p[0]) / p[1];
            let q = 1.0 + u * u;
            let row = Vector4::new(
                4.0 * p[2] * u / (p[1] * q * q),
                2.0 * p[2] * u * u / (p[1] * q * q),
                1.0 / q,
                1.0,
            );
            jtj += row * row.transpose();
            jtr += row * ri;
        }
        let mut damped = jtj;
        for k in 0..4 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
        }
        let Some(step) = damped.cholesky().map(|ch| ch.solve(&(-jtr))) else {
            lambda *= 10.0;
            continue;
        };
        let relative = step.norm() / (p.norm() + STEP_TOLERANCE);
        let trial = p + step;
        let r_trial = residuals(&trial);
        let c_trial = cost(&r_trial);
        if c_trial.is_finite() && c_trial <= c {
            p = trial;
            r = r_trial;
            c = c_trial;
            lambda = (lambda * 0.1).max(1e-15);
        } else {
            lambda *= 10.0;
        }
        if relative < STEP_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EstimatorError::NonConvergence(MAX_ITERATIONS));
    }

    let fit = LorentzianFit {
        center: x_ref + p[0] * width,
        fwhm: p[1].abs() * width,
        amplitude: p[2] * y_scale,
        offset: p[3] * y_scale,
        residual_rms: 0.0,
    };
    let rms = (x.iter().zip(&y).map(|(&f, &v)| (fit.eval(f) - v).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    Ok(LorentzianFit { residual_rms: rms, ..fit })
}
