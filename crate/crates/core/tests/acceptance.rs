//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use photon_source::dynamics::{evolve_constant, steady_state_population, steady_state_sigma_minus, AtomRates, BlochState, Drive, PulseEnvelope};
use photon_source::emission::{
    emitted_energy, filtered_expectation, instantaneous_power, predicted_residual_sigma, rabi_sweep,
    time_trace_experiment, wavepacket_spectrum, Line, MeasurementChain, PulseTrain,
};
use photon_source::estimators::{
    calibrate_pi_pulse, dephasing_for_bound, efficiency_sweep, fit_circle, fit_lorentzian, local_maxima,
    reflection_sweep, DephasingBump, DephasingModel,
};
use photon_source::harness::{parse_scenario, run, RunOptions};
use photon_source::scattering::{coupling_impedance, direct_leakage, rates_from_network, weak_coefficients, CouplingNetwork};
use photon_source::spectrum::FluxQubitParams;
use photon_source::units::angular;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const OMEGA: f64 = 2.0 * PI * 6.728e9;

fn reference_rates() -> AtomRates {
    rates_from_network(&CouplingNetwork::reference_device(), OMEGA)
}

fn steady_state_oracle() -> Outcome {
    let start = Instant::now();
    let rates = reference_rates().with_dephasing(angular(2.0e6)).unwrap();
    let (g1, g2) = (rates.gamma1(), rates.gamma2());
    let settle = 40.0 / g1.min(g2);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let detuning = -5.0 * g2 + 10.0 * g2 * i as f64 / 19.0;
        for j in 0..20 {
            let rabi = 3.0 * (g1 * g2).sqrt() * j as f64 / 19.0;
            let drive = Drive::new(rabi, detuning, 6.728e9);
            let end = evolve_constant(BlochState::ground(), &rates, drive, settle).unwrap().last();
            let s = steady_state_sigma_minus(&rates, &drive);
            let p = steady_state_population(&rates, &drive);
            let sm = end.sigma_minus();
            worst = worst.max((sm.re - s.re).abs()).max((sm.im - s.im).abs()).max((end.population() - p).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-8 && secs < 10.0, format!("max deviation {worst:.2e}, {secs:.2} s"))
}

fn energy_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dipole = CouplingNetwork::reference_device().dipole_voltage();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let cc = rng.random_range(0.1e-15..10e-15);
        let ce = rng.random_range(0.1e-15..10e-15);
        let net = CouplingNetwork::new(cc, ce, 50.0, dipole).unwrap();
        let rates = rates_from_network(&net, OMEGA);
        let detuning = rng.random_range(-10.0..10.0) * rates.gamma2();
        let p = weak_coefficients(&rates, &net, detuning);
        worst = worst.max((p.r_c.norm_sqr() + p.t_ce.norm_sqr() - 1.0).abs());
    }
    check(worst <= 1e-9, format!("max ||r_c|²+|t_ce|²−1| = {worst:.2e} over 1000 tuples"))
}

fn smith_circle() -> Outcome {
    let net = CouplingNetwork::reference_device();
    let base = reference_rates();
    // Γ2 = Γ1ᵉ / 1.5 so that Γ1ᵉ/2Γ2 = 0.75.
    let gamma = base.gamma1_e() / 1.5 - 0.5 * base.gamma1();
    let rates = base.with_dephasing(gamma).unwrap();
    let sweep = reflection_sweep(&rates, &net);
    let clean = fit_circle(&sweep).unwrap().radius;
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut worst_noisy = 0.0f64;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<Complex64> =
            sweep.iter().map(|r| r + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng))).collect();
        worst_noisy = worst_noisy.max((fit_circle(&noisy).unwrap().radius - 0.75).abs());
    }
    let r0 = weak_coefficients(&rates, &net, 0.0).r_e;
    let res_err = (r0 - Complex64::new(-0.5, 0.0)).norm();
    check(
        (clean - 0.75).abs() <= 1e-3 && worst_noisy <= 0.01 && res_err <= 1e-6,
        format!("radius {clean:.6}, worst noisy |Δr| {worst_noisy:.4}, r_e(0) error {res_err:.1e}"),
    )
}

fn linewidth() -> Outcome {
    let rates = AtomRates::radiative(angular(12.5e6) / 26.0, angular(12.5e6) * 25.0 / 26.0).unwrap();
    let f0 = 6.728e9;
    let freqs: Vec<f64> = (0..=800).map(|k| f0 - 100e6 + k as f64 * 0.25e6).collect();
    let energy = emitted_energy(&rates, OMEGA, 1.0, Line::Emission);
    let psd = wavepacket_spectrum(&rates, f0, &freqs, energy).unwrap();
    let fwhm = fit_lorentzian(&freqs, &psd).unwrap().fwhm;
    check((fwhm / 12.5e6 - 1.0).abs() <= 0.02, format!("FWHM {:.4} MHz", fwhm / 1e6))
}

fn rabi_calibration() -> Outcome {
    let rabi = angular(76.923e6);
    let step = 0.1e-9;
    let durations: Vec<f64> = (0..=300).map(|k| k as f64 * step).collect();
    let g1 = angular(1e3);
    let rates = AtomRates::radiative(g1 / 26.0, g1 * 25.0 / 26.0).unwrap();
    let sweep = rabi_sweep(&rates, rabi, &durations, 5.0 / g1, 0.0, 6.728e9).unwrap();
    let dt_pi = calibrate_pi_pulse(&sweep).unwrap().dt_pi;

    // Each incoherent maximum sits a quarter Rabi period from the coherent
    // maxima on either side and on a coherent minimum.
    let coherent: Vec<f64> = sweep.iter().map(|p| p.coherent_amp).collect();
    let incoherent: Vec<f64> = sweep.iter().map(|p| p.incoherent).collect();
    let neg: Vec<f64> = coherent.iter().map(|c| -c).collect();
    let c_max: Vec<f64> = local_maxima(&coherent).into_iter().map(|k| durations[k]).collect();
    let c_min: Vec<f64> = local_maxima(&neg).into_iter().map(|k| durations[k]).collect();
    let i_max: Vec<f64> = local_maxima(&incoherent).into_iter().map(|k| durations[k]).collect();
    let quarter = 0.5 * PI / rabi;
    let near = |set: &[f64], t: f64| set.iter().any(|&x| (x - t).abs() <= step + 1e-12);
    let interleaved = i_max.len() >= 2
        && i_max.iter().all(|&t| near(&c_max, t - quarter) && near(&c_max, t + quarter) && near(&c_min, t));
    check(
        (dt_pi - 6.5e-9).abs() <= step && interleaved,
        format!(
            "Δt_π = {:.4} ns; {} incoherent maxima flanked by coherent maxima at ±T_R/4 = {:.3} ns: {interleaved}",
            dt_pi * 1e9,
            i_max.len(),
            quarter * 1e9
        ),
    )
}

fn time_trace() -> Outcome {
    let start = Instant::now();
    let rates = AtomRates::radiative(angular(12.5e6) / 26.0, angular(12.5e6) * 25.0 / 26.0).unwrap();
    let train = PulseTrain::new(PulseEnvelope::pi_pulse(angular(76.923e6)), 100e-9, 3).unwrap();
    let chain = MeasurementChain {
        sample_interval: 4e-9,
        filter_bandwidth: Some(30e6),
        noise_sigma: instantaneous_power(&rates, OMEGA, 1.0, Line::Emission).sqrt(),
        averages: 100_000,
        seed: 11,
    };
    let measured = time_trace_experiment(&rates, OMEGA, &train, &chain, 0.0).unwrap();
    let expected = filtered_expectation(&rates, OMEGA, &train, &chain, 0.0).unwrap();
    let sigma = predicted_residual_sigma(&expected, &chain.filter().unwrap(), &chain);
    let worst = (0..measured.len())
        .map(|k| (measured.power[k] - expected.power[k]).abs() / sigma[k])
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 3.0 && secs < 60.0, format!("worst |residual|/σ = {worst:.2} over {} samples, {secs:.1} s", measured.len()))
}

fn golden_numbers() -> Outcome {
    let net = CouplingNetwork::uncalibrated(1e-15, 5e-15, 50.0).unwrap();
    let w = angular(10e9);
    let leak = direct_leakage(&net, w);
    let zc = coupling_impedance(&net, w);
    let rates = reference_rates();
    let ratio = rates.gamma1_c() / rates.gamma1_e();
    let eff = rates.emission_efficiency();
    check(
        (1e-3..=2e-3).contains(&leak)
            && (2.5e3..=3.0e3).contains(&zc)
            && (ratio - 0.04).abs() < 1e-12
            && (eff - 25.0 / 26.0).abs() < 1e-12,
        format!("leakage {leak:.3e}, |Z_C| {zc:.1} Ω, Γ1ᶜ/Γ1ᵉ {ratio:.6}, efficiency {eff:.6}"),
    )
}

fn efficiency() -> Outcome {
    let params = FluxQubitParams::reference_device();
    let net = CouplingNetwork::reference_device();
    let step = 0.025e9;
    let targets: Vec<f64> = (0..=95).map(|k| 6.728e9 + k as f64 * step).filter(|&f| f <= 9.1e9).collect();
    let flat = efficiency_sweep(&params, &net, &DephasingModel::constant(0.0), 0.0, &targets).unwrap();
    let flat_dev = flat.iter().map(|p| (p.bound - 25.0 / 26.0).abs()).fold(0.0, f64::max);

    let base = dephasing_for_bound(&rates_from_network(&net, angular(params.gap())), 0.75).unwrap();
    let mut model = DephasingModel::constant(base);
    model.bumps.push(DephasingBump::at_frequency(&params, 7.25e9, 3e-3, angular(3e6)).unwrap());
    let real = efficiency_sweep(&params, &net, &model, 0.0, &targets).unwrap();
    let smooth = efficiency_sweep(&params, &net, &DephasingModel::constant(base), 0.0, &targets).unwrap();
    let at_gap = real[0].bound;
    let lowest = real.iter().map(|p| p.bound).fold(f64::INFINITY, f64::min);
    let dip = real
        .iter()
        .zip(&smooth)
        .max_by(|a, b| (a.1.bound - a.0.bound).total_cmp(&(b.1.bound - b.0.bound)))
        .unwrap();
    let depth = dip.1.bound - dip.0.bound;
    check(
        flat_dev < 1e-6 && (at_gap - 0.75).abs() < 1e-6 && lowest >= 0.5 && (dip.0.frequency - 7.25e9).abs() <= step && depth > 0.1,
        format!(
            "flat max |bound−25/26| {flat_dev:.1e}; calibrated {at_gap:.6} at gap, min {lowest:.3}, dip {depth:.3} deep at {:.3} GHz",
            dip.0.frequency / 1e9
        ),
    )
}

fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut names: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let tmp = tempfile::tempdir().unwrap();
    let mut kinds = Vec::new();
    let mut files = 0;
    for path in names.iter().filter(|p| p.extension().is_some_and(|e| e == "toml")) {
        let text = std::fs::read_to_string(path).unwrap();
        let mut outputs = Vec::new();
        for (i, threads) in [1usize, 4].into_iter().enumerate() {
            let mut s = parse_scenario(&text, tmp.path()).unwrap();
            s.output_dir = tmp.path().join(format!("{}-{i}", s.kind.name()));
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let manifest = pool.install(|| run(&s, &RunOptions { timestamp: Some(0) })).unwrap();
            let mut bytes = Vec::new();
            for f in manifest.files.iter().map(|f| f.name.clone()).chain(["manifest.json".to_owned()]) {
                bytes.push((f.clone(), std::fs::read(s.output_dir.join(&f)).unwrap()));
            }
            outputs.push(bytes);
            if i == 0 {
                kinds.push(s.kind.name());
            }
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{} differs between runs", path.display()));
        }
        files += outputs[0].len();
    }
    check(kinds.len() == 6, format!("{} files byte-identical across 1- and 4-thread runs of {}", files, kinds.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("steady-state oracle", steady_state_oracle),
        ("energy conservation", energy_conservation),
        ("Smith circle", smith_circle),
        ("linewidth", linewidth),
        ("Rabi calibration", rabi_calibration),
        ("time trace", time_trace),
        ("decoupling golden numbers", golden_numbers),
        ("efficiency sweep", efficiency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
