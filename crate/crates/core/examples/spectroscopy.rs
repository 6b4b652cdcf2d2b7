//! Flux-qubit spectrum and the transmission dip it leaves on the control line.
//!
//! Run with `cargo run --example spectroscopy`.

use photon_source::scattering::{transmission_map, CouplingNetwork, RateModel};
use photon_source::spectrum::{flux_for_frequency, sweep_spectrum, FluxQubitParams};
use photon_source::units::angular;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = FluxQubitParams::reference_device();
    println!("gap {:.3} GHz, slope {:.1} GHz/Φ0", params.gap() / 1e9, params.flux_slope() / 1e9);

    for (dphi, f) in sweep_spectrum(&params, (-0.04, 0.04), 9) {
        println!("  δΦ = {:+6.1} mΦ0  ->  f10 = {:.4} GHz", dphi * 1e3, f / 1e9);
    }
    let dphi = flux_for_frequency(&params, 8.0e9)?;
    println!("8.000 GHz is reached at δΦ = ±{:.3} mΦ0", dphi * 1e3);

    let network = CouplingNetwork::reference_device();
    let model = RateModel { network, gamma1_nr: angular(0.5e6), gamma_phi: angular(2.0e6) };
    let flux: Vec<f64> = (-6..=6).map(|k| k as f64 * 5e-3).collect();
    let freq: Vec<f64> = (0..=540).map(|k| 6.4e9 + k as f64 * 5e6).collect();
    let map = transmission_map(&params, &model, &flux, &freq)?;
    println!("\ntransmission minimum (ridge) per flux point:");
    for (dphi, ridge) in flux.iter().zip(map.ridge()) {
        println!("  δΦ = {:+5.1} mΦ0  dip at {:.3} GHz", dphi * 1e3, ridge / 1e9);
    }
    Ok(())
}
