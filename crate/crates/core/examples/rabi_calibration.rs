//! Rabi oscillations in the emitted field and π-pulse calibration from the
//! first maximum of incoherent emission.
//!
//! Run with `cargo run --example rabi_calibration`.

use photon_source::dynamics::AtomRates;
use photon_source::emission::rabi_sweep;
use photon_source::estimators::calibrate_pi_pulse;
use photon_source::units::angular;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rabi = angular(76.923e6);
    let durations: Vec<f64> = (0..=300).map(|k| k as f64 * 0.1e-9).collect();
    let carrier = 6.728e9;

    for (label, gamma1) in [("nearly ideal", angular(1e3)), ("Γ1/2π = 12.5 MHz", angular(12.5e6))] {
        let rates = AtomRates::radiative(gamma1 / 26.0, gamma1 * 25.0 / 26.0)?;
        let period = (100e-9f64).max(5.0 / gamma1);
        let sweep = rabi_sweep(&rates, rabi, &durations, period, 0.0, carrier)?;
        let cal = calibrate_pi_pulse(&sweep)?;
        println!("{label}: Δt_π = {:.3} ns (π/Ω = {:.3} ns)", cal.dt_pi * 1e9, std::f64::consts::PI / rabi * 1e9);
        for p in sweep.iter().step_by(20) {
            println!(
                "  Δt = {:5.1} ns  coherent {:.3e}  incoherent {:.3e}  P1 {:.3e}",
                p.duration * 1e9,
                p.coherent_amp,
                p.incoherent,
                p.population
            );
        }
    }
    Ok(())
}
