//! Emission-line reflection on the Smith chart: the weak-drive circle and how
//! it collapses as the drive power saturates the atom.
//!
//! Run with `cargo run --example smith_chart`.

use photon_source::dynamics::AtomRates;
use photon_source::estimators::{efficiency_bound_from_radius, fit_circle};
use photon_source::scattering::{smith_power_sweep, weak_coefficients, CouplingNetwork};
use photon_source::units::{angular, dbm_to_watts};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let network = CouplingNetwork::reference_device();
    let carrier = 6.728e9;
    // Dephasing chosen so that Γ1ᵉ/2Γ2 = 0.75.
    let gamma1_e = angular(12.0e6);
    let gamma1_c = gamma1_e / 25.0;
    let gamma2 = gamma1_e / 1.5;
    let rates = AtomRates::radiative(gamma1_c, gamma1_e)?.with_dephasing(gamma2 - 0.5 * (gamma1_c + gamma1_e))?;

    let on_resonance = weak_coefficients(&rates, &network, 0.0);
    println!("weak drive, on resonance: r_e = {:.6}", on_resonance.r_e);

    let detunings: Vec<f64> = (-100..=100).map(|k| k as f64 * 0.05 * rates.gamma2()).collect();
    let powers_dbm = [-149.0, -140.0, -134.0, -128.0];
    let powers: Vec<f64> = powers_dbm.iter().map(|&p| dbm_to_watts(p)).collect();
    let traces = smith_power_sweep(&rates, &network, carrier, &powers, &detunings);
    for (dbm, trace) in powers_dbm.iter().zip(&traces) {
        let fit = fit_circle(trace)?;
        let rmin = trace.iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
        println!(
            "{dbm:6.1} dBm: radius {:.4}, centre {:.4}, min Re r_e {:.4}, rms {:.1e}",
            fit.radius, fit.center, rmin, fit.residual_rms
        );
    }
    let weakest = fit_circle(&traces[0])?;
    println!("efficiency lower bound from the weakest trace: {:.3}", efficiency_bound_from_radius(&weakest)?);
    Ok(())
}
