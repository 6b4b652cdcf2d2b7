//! Scenario execution: one dataset per figure-style experiment.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{Scenario, ScenarioKind};
use super::output::{sha256_hex, CsvTable, OutputDir, RunManifest};
use super::HarnessError;
use crate::dynamics::{AtomRates, PulseEnvelope};
use crate::emission::{
    emitted_energy, filtered_expectation, instantaneous_power, photon_wavepacket, rabi_sweep, time_trace_experiment,
    wavepacket_spectrum, Line, MeasurementChain, PulseTrain,
};
use crate::estimators::{
    calibrate_pi_pulse, dephasing_for_bound, efficiency_sweep, fit_circle, fit_lorentzian, DephasingBump,
    DephasingModel, FitRecord,
};
use crate::scattering::{rabi_from_power, rates_from_network, smith_power_sweep, transmission_map, CouplingNetwork, RateModel};
use crate::spectrum::{transition_frequency, FluxBias, FluxQubitParams};
use crate::units::{angular, dbm_to_watts};

/// Per-invocation settings that are not part of the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Manifest timestamp; defaults to `SOURCE_DATE_EPOCH`, then the clock.
    pub timestamp: Option<u64>,
}

impl RunOptions {
    fn timestamp(&self) -> u64 {
        self.timestamp
            .or_else(|| std::env::var("SOURCE_DATE_EPOCH").ok()?.parse().ok())
            .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

/// `n` points from `lo` to `hi` inclusive; a single point sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Device model shared by every scenario kind.
struct Device {
    params: FluxQubitParams,
    network: CouplingNetwork,
    gamma1_nr: f64,
    gamma_phi: f64,
}

impl Device {
    fn from_scenario(s: &Scenario) -> Result<Self, HarnessError> {
        let params = FluxQubitParams::new(s.hz("qubit.gap_ghz"), s.get("qubit.persistent_current_na") * 1e-9).map_err(runtime)?;
        let network = CouplingNetwork::uncalibrated(
            s.get("network.c_control_ff") * 1e-15,
            s.get("network.c_emission_ff") * 1e-15,
            s.get("network.impedance_ohm"),
        )
        .and_then(|n| n.calibrated(angular(params.gap()), s.rate("network.gamma1_mhz")))
        .map_err(runtime)?;
        Ok(Self {
            params,
            network,
            gamma1_nr: s.rate("decoherence.gamma_nr_mhz"),
            gamma_phi: s.rate("decoherence.gamma_phi_mhz"),
        })
    }

    fn omega(&self) -> f64 {
        angular(self.params.gap())
    }

    /// Rates at the degeneracy point.
    fn rates(&self) -> Result<AtomRates, HarnessError> {
        rates_from_network(&self.network, self.omega())
            .with_nonradiative(self.gamma1_nr)
            .and_then(|r| r.with_dephasing(self.gamma_phi))
            .map_err(runtime)
    }
}

#[derive(Serialize)]
struct Labeled<T: Serialize> {
    label: f64,
    #[serde(flatten)]
    record: FitRecord<T>,
}

/// Digest of the resolved scenario (kind, seed, parameters).
pub fn scenario_digest(s: &Scenario) -> String {
    let canonical = serde_json::json!({ "kind": s.kind.name(), "seed": s.seed, "parameters": s.parameters_json() });
    sha256_hex(canonical.to_string().as_bytes())
}

/// Runs a validated scenario and writes its datasets plus `manifest.json`.
pub fn run(s: &Scenario, options: &RunOptions) -> Result<RunManifest, HarnessError> {
    let device = Device::from_scenario(s)?;
    let mut out = OutputDir::create(&s.output_dir)?;
    match s.kind {
        ScenarioKind::Spectroscopy => spectroscopy(s, &device, &mut out)?,
        ScenarioKind::SmithPowerSweep => smith(s, &device, &mut out)?,
        ScenarioKind::Rabi => rabi(s, &device, &mut out)?,
        ScenarioKind::Wavepacket => wavepacket(s, &device, &mut out)?,
        ScenarioKind::Timetrace => timetrace(s, &device, &mut out)?,
        ScenarioKind::EfficiencySweep => efficiency(s, &device, &mut out)?,
    }
    let manifest = RunManifest {
        kind: s.kind.name().to_owned(),
        scenario_sha256: scenario_digest(s),
        toolkit_version: env!("CARGO_PKG_VERSION").to_owned(),
        timestamp: options.timestamp(),
        seed: s.seed,
        parameters: s.parameters_json(),
        files: out.files().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}

fn spectroscopy(s: &Scenario, d: &Device, out: &mut OutputDir) -> Result<(), HarnessError> {
    let flux = linspace(
        s.flux("spectroscopy.flux_min_mphi0"),
        s.flux("spectroscopy.flux_max_mphi0"),
        s.count("spectroscopy.flux_points"),
    );
    let freq = linspace(s.hz("spectroscopy.freq_min_ghz"), s.hz("spectroscopy.freq_max_ghz"), s.count("spectroscopy.freq_points"));
    let model = RateModel { network: d.network, gamma1_nr: d.gamma1_nr, gamma_phi: d.gamma_phi };
    let map = transmission_map(&d.params, &model, &flux, &freq).map_err(runtime)?;

    let mut table = CsvTable::new(&["flux_phi0", "frequency_hz", "t_norm"]);
    for (row, &dphi) in map.values.iter().zip(&flux) {
        for (&v, &f) in row.iter().zip(&freq) {
            table.push(vec![dphi, f, v]);
        }
    }
    out.write_csv("transmission.csv", &table)?;

    let mut ridge = CsvTable::new(&["flux_phi0", "resonance_hz", "ridge_hz"]);
    for (&dphi, r) in flux.iter().zip(map.ridge()) {
        let f10 = transition_frequency(&d.params, FluxBias::at(dphi).map_err(runtime)?);
        ridge.push(vec![dphi, f10, r]);
    }
    out.write_csv("ridge.csv", &ridge)?;
    Ok(())
}

fn smith(s: &Scenario, d: &Device, out: &mut OutputDir) -> Result<(), HarnessError> {
    let rates = d.rates()?;
    let lo = s.get("smith.power_min_dbm");
    let hi = s.get("smith.power_max_dbm");
    let step = s.get("smith.power_step_db");
    let n_powers = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let powers_dbm: Vec<f64> = (0..n_powers).map(|k| lo + step * k as f64).collect();
    let powers: Vec<f64> = powers_dbm.iter().map(|&p| dbm_to_watts(p)).collect();
    let half = 0.5 * s.rate("smith.detuning_span_mhz");
    let detunings = linspace(-half, half, s.count("smith.detuning_points"));
    let traces = smith_power_sweep(&rates, &d.network, d.params.gap(), &powers, &detunings);

    let mut table = CsvTable::new(&["power_dbm", "rabi_rad_s", "detuning_hz", "r_e_re", "r_e_im"]);
    let mut fits = Vec::new();
    for ((&dbm, &p), trace) in powers_dbm.iter().zip(&powers).zip(&traces) {
        let rabi = rabi_from_power(&d.network, Line::Emission, p);
        for (&dw, r) in detunings.iter().zip(trace) {
            table.push(vec![dbm, rabi, crate::units::ordinary(dw), r.re, r.im]);
        }
        let fit = fit_circle(trace).map_err(runtime)?;
        fits.push(Labeled { label: dbm, record: FitRecord::for_points("circle", trace, fit) });
    }
    out.write_csv("smith.csv", &table)?;
    out.write_json("circle_fits.json", &fits)?;
    Ok(())
}

fn rabi(s: &Scenario, d: &Device, out: &mut OutputDir) -> Result<(), HarnessError> {
    let rates = d.rates()?;
    let step = s.seconds("rabi.dt_step_ns");
    let n = (s.seconds("rabi.dt_max_ns") / step + 1e-9).floor() as usize + 1;
    let durations: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
    let sweep = rabi_sweep(
        &rates,
        s.rate("rabi.rabi_mhz"),
        &durations,
        s.seconds("rabi.period_ns"),
        s.rate("rabi.detuning_mhz"),
        d.params.gap(),
    )
    .map_err(runtime)?;

    let mut table = CsvTable::new(&["dt_s", "coherent_re", "coherent_im", "coherent_amp", "incoherent", "population"]);
    for p in &sweep {
        table.push(vec![p.duration, p.coherent.re, p.coherent.im, p.coherent_amp, p.incoherent, p.population]);
    }
    out.write_csv("rabi.csv", &table)?;

    let inc: Vec<f64> = sweep.iter().map(|p| p.incoherent).collect();
    let record = match calibrate_pi_pulse(&sweep) {
        Ok(cal) => serde_json::json!(FitRecord::new("pi_pulse", &[&durations, &inc], cal)),
        Err(e) => serde_json::json!({ "kind": "pi_pulse", "error": e.to_string() }),
    };
    out.write_json("pi_pulse.json", &record)?;
    Ok(())
}

fn wavepacket(s: &Scenario, d: &Device, out: &mut OutputDir) -> Result<(), HarnessError> {
    let rates = d.rates()?;
    let w = d.omega();
    let times = linspace(0.0, s.seconds("wavepacket.t_max_ns"), s.count("wavepacket.t_points"));
    let trace = photon_wavepacket(&rates, w, &times);
    let mut table = CsvTable::new(&["time_s", "power_W"]);
    for (&t, &p) in trace.times.iter().zip(&trace.power) {
        table.push(vec![t, p]);
    }
    out.write_csv("wavepacket.csv", &table)?;

    let f0 = d.params.gap();
    let half = 0.5 * s.hz("wavepacket.freq_span_mhz");
    let freqs = linspace(f0 - half, f0 + half, s.count("wavepacket.freq_points"));
    let energy = emitted_energy(&rates, w, 1.0, Line::Emission);
    let psd = wavepacket_spectrum(&rates, f0, &freqs, energy).map_err(runtime)?;
    let mut spec = CsvTable::new(&["frequency_hz", "psd_J_per_Hz"]);
    for (&f, &v) in freqs.iter().zip(&psd) {
        spec.push(vec![f, v]);
    }
    out.write_csv("spectrum.csv", &spec)?;
    let fit = fit_lorentzian(&freqs, &psd).map_err(runtime)?;
    out.write_json("lorentzian_fit.json", &FitRecord::new("lorentzian", &[&freqs, &psd], fit))?;
    Ok(())
}

fn timetrace(s: &Scenario, d: &Device, out: &mut OutputDir) -> Result<(), HarnessError> {
    let rates = d.rates()?;
    let w = d.omega();
    let train = PulseTrain::new(
        PulseEnvelope::pi_pulse(s.rate("timetrace.rabi_mhz")),
        s.seconds("timetrace.period_ns"),
        s.count("timetrace.pulses"),
    )
    .map_err(runtime)?;
    let peak_amplitude = instantaneous_power(&rates, w, 1.0, Line::Emission).sqrt();
    let chain = MeasurementChain {
        sample_interval: s.seconds("timetrace.sample_ns"),
        filter_bandwidth: s.get_opt("timetrace.filter_mhz").map(|b| b * 1e6),
        noise_sigma: s.get("timetrace.noise_sigma_rel") * peak_amplitude,
        averages: s.get("timetrace.averages") as u64,
        seed: s.seed,
    };
    let trace = time_trace_experiment(&rates, w, &train, &chain, 0.0).map_err(runtime)?;
    let expected = filtered_expectation(&rates, w, &train, &chain, 0.0).map_err(runtime)?;
    let mut table = CsvTable::new(&["time_s", "power_W"]);
    for (&t, &p) in trace.times.iter().zip(&trace.power) {
        table.push(vec![t, p]);
    }
    out.write_csv("trace.csv", &table)?;
    let mut ideal = CsvTable::new(&["time_s", "power_W"]);
    for (&t, &p) in expected.times.iter().zip(&expected.power) {
        ideal.push(vec![t, p]);
    }
    out.write_csv("expected.csv", &ideal)?;
    Ok(())
}

fn efficiency(s: &Scenario, d: &Device, out: &mut OutputDir) -> Result<(), HarnessError> {
    let targets = linspace(s.hz("efficiency.freq_min_ghz"), s.hz("efficiency.freq_max_ghz"), s.count("efficiency.points"));
    let base = match s.get_opt("efficiency.bound_at_gap") {
        Some(bound) => {
            let at_gap = rates_from_network(&d.network, d.omega()).with_nonradiative(d.gamma1_nr).map_err(runtime)?;
            dephasing_for_bound(&at_gap, bound).map_err(runtime)?
        }
        None => d.gamma_phi,
    };
    let mut model = DephasingModel::constant(base);
    if let Some(dip) = s.get_opt("efficiency.dip_ghz") {
        model.bumps.push(
            DephasingBump::at_frequency(
                &d.params,
                dip * 1e9,
                s.flux("efficiency.dip_width_mphi0"),
                s.rate("efficiency.dip_height_mhz"),
            )
            .map_err(runtime)?,
        );
    }
    let points = efficiency_sweep(&d.params, &d.network, &model, d.gamma1_nr, &targets).map_err(runtime)?;

    let mut table = CsvTable::new(&["frequency_hz", "flux_phi0", "efficiency_bound", "efficiency", "radius", "center_re", "center_im"]);
    for p in &points {
        table.push(vec![p.frequency, p.flux, p.bound, p.efficiency, p.fit.radius, p.fit.center.re, p.fit.center.im]);
    }
    out.write_csv("efficiency.csv", &table)?;
    out.write_json("efficiency_fits.json", &points)?;
    Ok(())
}
