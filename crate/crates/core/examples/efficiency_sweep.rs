//! Lower bound on the emission efficiency across the tunable range, from
//! circle fits to synthesized reflection sweeps.
//!
//! Run with `cargo run --example efficiency_sweep`.

use photon_source::estimators::{dephasing_for_bound, efficiency_sweep, DephasingBump, DephasingModel};
use photon_source::scattering::{rates_from_network, CouplingNetwork};
use photon_source::spectrum::FluxQubitParams;
use photon_source::units::angular;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = FluxQubitParams::reference_device();
    let network = CouplingNetwork::reference_device();
    let targets: Vec<f64> = (0..=12).map(|k| 6.728e9 + k as f64 * 0.2e9).collect();

    let ideal = efficiency_sweep(&params, &network, &DephasingModel::constant(0.0), 0.0, &targets)?;
    let gamma_phi = dephasing_for_bound(&rates_from_network(&network, angular(params.gap())), 0.75)?;
    let mut noisy = DephasingModel::constant(gamma_phi);
    noisy.bumps.push(DephasingBump::at_frequency(&params, 7.25e9, 3e-3, angular(3e6))?);
    let real = efficiency_sweep(&params, &network, &noisy, 0.0, &targets)?;

    println!("  f/GHz   bound(γ=0)  bound(γ calibrated + dip)");
    for (a, b) in ideal.iter().zip(&real) {
        println!("  {:6.3}   {:.4}      {:.4}", a.frequency / 1e9, a.bound, b.bound);
    }
    Ok(())
}
