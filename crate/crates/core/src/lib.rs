//! Simulation and characterization toolkit for a tuneable on-demand
//! microwave photon source: a flux-qubit two-level atom capacitively coupled
//! to a weakly coupled control line and a strongly coupled emission line.
//!
//! | module | what it covers |
//! |---|---|
//! | [`spectrum`] | flux bias → transition frequency and back |
//! | [`dynamics`] | Bloch equations, closed-form steady state, pulses |
//! | [`scattering`] | circuit → decay rates, reflection/transmission coefficients |
//! | [`emission`] | pulse trains, Rabi sweeps, wavepackets, digitized traces |
//! | [`estimators`] | Lorentzian and circle fits, π-pulse calibration, efficiency |
//! | [`harness`] | scenario files → reproducible CSV/JSON datasets |
//!
//! Runnable walkthroughs of each capability live in `examples/`.

// Negated comparisons (`!(x > 0.0)`) are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod emission;
pub mod estimators;
pub mod harness;
pub mod scattering;
pub mod spectrum;
pub mod units;

pub use dynamics::{AtomRates, BlochState, Drive, PulseEnvelope, Trajectory};
pub use scattering::{CouplingNetwork, ScatteringPoint};
pub use spectrum::{FluxBias, FluxQubitParams};
