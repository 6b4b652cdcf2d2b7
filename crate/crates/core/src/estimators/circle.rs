use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EstimatorError;

const MAX_ITERATIONS: usize = 100;

/// Circle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    /// RMS of the radial residuals |z − center| − radius.
    pub residual_rms: f64,
}

/// Algebraic (Kåsa) fit refined by Gauss–Newton on the geometric distance.
pub fn fit_circle(points: &[Complex64]) -> Result<CircleFit, EstimatorError> {
    if points.len() < 3 {
        return Err(EstimatorError::InsufficientData { needed: 3, got: points.len() });
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<Complex64>() / n;
    let scale = (points.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n).sqrt();
    if !(scale > 0.0) {
        return Err(EstimatorError::Degenerate);
    }
    let pts: Vec<Complex64> = points.iter().map(|z| (z - mean) / scale).collect();

    // collinearity: second principal axis of the scatter vanishes
    let (sxx, syy, sxy) = pts.iter().fold((0.0, 0.0, 0.0), |(a, b, c), z| (a + z.re * z.re, b + z.im * z.im, c + z.re * z.im));
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let minor = 0.5 * tr - disc;
    let major = 0.5 * tr + disc;
    if minor <= 1e-24 * major {
        return Err(EstimatorError::Degenerate);
    }

    // x² + y² + D·x + E·y + F = 0
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for z in &pts {
        let row = Vector3::new(z.re, z.im, 1.0);
        ata += row * row.transpose();
        atb -= row * z.norm_sqr();
    }
    let sol = ata.lu().solve(&atb).ok_or(EstimatorError::Degenerate)?;
    let mut c = Complex64::new(-0.5 * sol[0], -0.5 * sol[1]);
    let mut r = (c.norm_sqr() - sol[2]).max(0.0).sqrt();

    let radial = |c: Complex64, r: f64| pts.iter().map(|z| (z - c).norm() - r).collect::<Vec<_>>();
    let cost = |res: &[f64]| res.iter().map(|v| v * v).sum::<f64>();
    let mut res = radial(c, r);
    let mut current = cost(&res);
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (z, ri) in pts.iter().zip(&res) {
            let d = (z - c).norm();
            if d == 0.0 {
                continue;
            }
            let row = Vector3::new(-(z.re - c.re) / d, -(z.im - c.im) / d, -1.0);
            jtj += row * row.transpose();
            jtr += row * *ri;
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else { break };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let c_new = c + Complex64::new(t * step[0], t * step[1]);
            let r_new = r + t * step[2];
            let res_new = radial(c_new, r_new);
            let cost_new = cost(&res_new);
            if cost_new <= current {
                c = c_new;
                r = r_new;
                res = res_new;
                current = cost_new;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved || t * step.norm() <= 1e-13 * (c.norm() + r) {
            break;
        }
    }

    let center = mean + c * scale;
    let radius = r.abs() * scale;
    let residual_rms = (points.iter().map(|z| ((z - center).norm() - radius).powi(2)).sum::<f64>() / n).sqrt();
    if !(radius > 0.0) {
        return Err(EstimatorError::Degenerate);
    }
    Ok(CircleFit { center, radius, residual_rms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_points() {
        let c = Complex64::new(0.3, -1.2);
        let pts: Vec<Complex64> = [0.1f64, 2.0, 4.0].iter().map(|&a| c + Complex64::from_polar(0.7, a)).collect();
        let fit = fit_circle(&pts).unwrap();
        assert!((fit.center - c).norm() < 1e-12);
        assert!((fit.radius - 0.7).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<Complex64> = (0..10).map(|k| Complex64::new(k as f64, 2.0 * k as f64 + 1.0)).collect();
        assert_eq!(fit_circle(&pts), Err(EstimatorError::Degenerate));
        assert!(matches!(fit_circle(&pts[..2]), Err(EstimatorError::InsufficientData { .. })));
        let same = vec![Complex64::new(1.0, 1.0); 5];
        assert_eq!(fit_circle(&same), Err(EstimatorError::Degenerate));
    }

    #[test]
    fn short_arc() {
        let c = Complex64::new(1.0 - 0.75, 0.0);
        let pts: Vec<Complex64> = (0..30).map(|k| c + Complex64::from_polar(0.75, -0.3 + 0.02 * k as f64)).collect();
        let fit = fit_circle(&pts).unwrap();
        assert!((fit.radius - 0.75).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn recovers_generating_circle(cx in -5.0f64..5.0, cy in -5.0f64..5.0, r in 0.01f64..10.0, a0 in 0.0f64..6.0, arc in 0.5f64..6.0) {
            let c = Complex64::new(cx, cy);
            let pts: Vec<Complex64> = (0..25).map(|k| c + Complex64::from_polar(r, a0 + arc * k as f64 / 24.0)).collect();
            let fit = fit_circle(&pts).unwrap();
            prop_assert!((fit.radius / r - 1.0).abs() < 1e-6);
            prop_assert!((fit.center - c).norm() < 1e-6 * r.max(1.0));
            let again = fit_circle(&pts).unwrap();
            prop_assert_eq!(fit, again);
        }
    }
}
