//! Why the asymmetric two-line layout works: the direct capacitive leakage
//! between the lines and the split of radiative decay between them.
//!
//! Run with `cargo run --example decoupling`.

use photon_source::scattering::{coupling_impedance, direct_leakage, rates_from_network, CouplingNetwork};
use photon_source::units::angular;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let network = CouplingNetwork::uncalibrated(1e-15, 5e-15, 50.0)?;
    let omega = angular(10e9);
    println!("|Z_C| at 10 GHz: {:.0} Ω", coupling_impedance(&network, omega));
    println!("direct leakage |2Z/Z_C|²: {:.3e}", direct_leakage(&network, omega));

    let rates = rates_from_network(&CouplingNetwork::reference_device(), angular(6.728e9));
    println!("Γ1ᶜ/Γ1ᵉ = {:.4}", rates.gamma1_c() / rates.gamma1_e());
    println!("maximal efficiency Γ1ᵉ/Γ1 = {:.4}", rates.emission_efficiency());
    Ok(())
}
