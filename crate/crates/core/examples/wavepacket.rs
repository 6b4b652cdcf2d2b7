//! Single-photon wavepacket after a π-pulse, its spectrum and a Lorentzian fit
//! recovering the linewidth.
//!
//! Run with `cargo run --example wavepacket`.

use photon_source::dynamics::AtomRates;
use photon_source::emission::{emitted_energy, photon_wavepacket, wavepacket_spectrum, Line};
use photon_source::estimators::fit_lorentzian;
use photon_source::units::{angular, HBAR};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f0 = 6.728e9;
    let omega = angular(f0);
    let gamma1 = angular(12.5e6);
    let rates = AtomRates::radiative(gamma1 / 26.0, gamma1 * 25.0 / 26.0)?;

    let times: Vec<f64> = (0..=10).map(|k| k as f64 * 10e-9).collect();
    let packet = photon_wavepacket(&rates, omega, &times);
    for (t, p) in packet.times.iter().zip(&packet.power) {
        println!("  t = {:5.1} ns  P = {:.3e} W", t * 1e9, p);
    }

    let energy = emitted_energy(&rates, omega, 1.0, Line::Emission);
    println!("energy into the emission line: {:.4} photons", energy / (HBAR * omega));

    let freqs: Vec<f64> = (0..=800).map(|k| f0 - 100e6 + k as f64 * 0.25e6).collect();
    let psd = wavepacket_spectrum(&rates, f0, &freqs, energy)?;
    let fit = fit_lorentzian(&freqs, &psd)?;
    println!("Lorentzian fit: centre {:.6} GHz, FWHM {:.4} MHz", fit.center / 1e9, fit.fwhm / 1e6);
    Ok(())
}
