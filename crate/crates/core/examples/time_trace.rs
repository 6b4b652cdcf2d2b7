//! Averaged, filtered output power under a π-pulse train, compared with the
//! ideal filtered exponential and the predicted 1/√N residual.
//!
//! Run with `cargo run --release --example time_trace`.

use photon_source::dynamics::{AtomRates, PulseEnvelope};
use photon_source::emission::{
    filtered_expectation, instantaneous_power, predicted_residual_sigma, time_trace_experiment, Line,
    MeasurementChain, PulseTrain,
};
use photon_source::units::angular;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega = angular(6.728e9);
    let gamma1 = angular(12.5e6);
    let rates = AtomRates::radiative(gamma1 / 26.0, gamma1 * 25.0 / 26.0)?;
    let train = PulseTrain::new(PulseEnvelope::pi_pulse(angular(76.923e6)), 100e-9, 2)?;
    let peak = instantaneous_power(&rates, omega, 1.0, Line::Emission);
    let chain = MeasurementChain {
        sample_interval: 4e-9,
        filter_bandwidth: Some(30e6),
        noise_sigma: peak.sqrt(),
        averages: 100_000,
        seed: 2024,
    };

    let measured = time_trace_experiment(&rates, omega, &train, &chain, 0.0)?;
    let expected = filtered_expectation(&rates, omega, &train, &chain, 0.0)?;
    let sigma = predicted_residual_sigma(&expected, &chain.filter()?, &chain);
    println!("   t/ns    measured/W     expected/W    σ/W");
    for (((t, m), e), s) in measured.times.iter().zip(&measured.power).zip(&expected.power).zip(&sigma) {
        println!("  {:5.0}  {m:+.4e}  {e:+.4e}  {s:.2e}", t * 1e9);
    }
    Ok(())
}
