use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::EstimatorError;
use crate::emission::RabiPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiPulseCalibration {
    /// Pulse length maximizing incoherent emission, s.
    pub dt_pi: f64,
    /// π/dt_pi, rad/s.
    pub rabi_freq: f64,
}

/// Indices of strict interior local maxima (plateaus count once, at their
/// first sample).
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let a = (x[1] - x[0]) * (y[1] - y[2]);
    let b = (x[1] - x[2]) * (y[1] - y[0]);
    let denom = a - b;
    if denom == 0.0 {
        return x[1];
    }
    x[1] - 0.5 * ((x[1] - x[0]) * a - (x[1] - x[2]) * b) / denom
}

/// π-pulse length from a Rabi sweep: the first maximum of incoherent
/// emission (the first Rabi lobe), refined by a parabola through the grid
/// maximum and its neighbours. Later lobes are ignored because emission
/// during long pulses keeps growing and can exceed the first lobe.
pub fn calibrate_pi_pulse(sweep: &[RabiPoint]) -> Result<PiPulseCalibration, EstimatorError> {
    if sweep.len() < 3 {
        return Err(EstimatorError::InsufficientData { needed: 3, got: sweep.len() });
    }
    let mut pts = sweep.to_vec();
    pts.sort_by(|a, b| a.duration.total_cmp(&b.duration));
    let y: Vec<f64> = pts.iter().map(|p| p.incoherent).collect();
    let k = *local_maxima(&y).first().ok_or(EstimatorError::NoOscillation)?;
    let dt_pi = parabola_vertex(
        [pts[k - 1].duration, pts[k].duration, pts[k + 1].duration],
        [y[k - 1], y[k], y[k + 1]],
    );
    Ok(PiPulseCalibration { dt_pi, rabi_freq: PI / dt_pi })
}
