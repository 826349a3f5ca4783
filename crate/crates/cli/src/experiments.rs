// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! The five experiment pipelines. Each one writes a single CSV (schema
//! in the module docs of [`crate::output`]) plus a JSON sidecar carrying
//! the resolved config and per-point derived scalars. Validity-condition
//! violations warn on stderr and the run proceeds.

use nlbath_core::quantum::{DensityMatrix, TimeGrid};
use nlbath_core::spinboson::{
    resonant_peak_height, simulate_probe_coherence, spectral_function, SpinBosonParams,
};
use nlbath_core::{dephasing, langevin, spectral};

use crate::config::ResolvedConfig;
use crate::output::{write_sidecar, CsvWriter};

fn classical_params(cfg: &ResolvedConfig, temperature: f64) -> anyhow::Result<langevin::ClassicalBathParams> {
    Ok(langevin::ClassicalBathParams::new(cfg.gamma1, temperature)?
        .with_probe_coupling(cfg.eps)?)
}

fn classical_ensemble(
    cfg: &ResolvedConfig,
    temperature: f64,
    seed_offset: u64,
    record_phase: bool,
) -> anyhow::Result<langevin::TrajectoryEnsemble> {
    let params = classical_params(cfg, temperature)?;
    let ens_cfg = langevin::EnsembleConfig::new(
        cfg.n,
        cfg.dt,
        cfg.t_max.expect("classical t_max resolved"),
        cfg.seed.wrapping_add(seed_offset),
    )
    .record_stride(cfg.record_stride)
    .record_phase(record_phase);
    Ok(langevin::simulate_ensemble(&params, &ens_cfg)?)
}

fn autocorrelation(
    cfg: &ResolvedConfig,
    ens: &langevin::TrajectoryEnsemble,
) -> anyhow::Result<spectral::AutocorrelationEstimate> {
    Ok(if cfg.time_average {
        spectral::autocorrelation_time_averaged(ens)?
    } else {
        spectral::autocorrelation(ens)?
    })
}

fn i_zero(
    cfg: &ResolvedConfig,
    ens: &langevin::TrajectoryEnsemble,
) -> anyhow::Result<(f64, f64)> {
    Ok(if cfg.time_average {
        spectral::i_zero_estimate_time_averaged(ens)?
    } else {
        spectral::i_zero_estimate(ens)?
    })
}

fn warn_cutoff(temperature: f64, spec: &spectral::SpectrumEstimate) {
    if spec.cutoff_warning {
        eprintln!(
            "warning: T = {temperature}: {:.1}% of the |C| mass lies beyond t_max/2; \
             the time cutoff may bias the spectrum",
            100.0 * spec.tail_fraction
        );
    }
}

pub fn classical_spectrum(cfg: &ResolvedConfig) -> anyhow::Result<()> {
    let omegas = spectral::symmetric_omega_grid(cfg.omega_max, cfg.omega_step);
    let mut csv = CsvWriter::create(&cfg.out, "temperature,omega,intensity,stderr")?;
    let mut derived = Vec::new();
    for (idx, &temperature) in cfg.temps.iter().enumerate() {
        let ens = classical_ensemble(cfg, temperature, idx as u64, false)?;
        let ac = autocorrelation(cfg, &ens)?;
        let spec = spectral::spectrum(&ac, &omegas)?;
        warn_cutoff(temperature, &spec);
        for ((&w, &i), &e) in omegas
            .iter()
            .zip(&spec.intensities)
            .zip(&spec.intensity_stderrs)
        {
            csv.row(&[temperature, w, i, e])?;
        }
        let (i0, i0_err) = i_zero(cfg, &ens)?;
        derived.push(serde_json::json!({
            "temperature": temperature,
            "i_zero": i0,
            "i_zero_stderr": i0_err,
            "k_zero": i0 / temperature,
            "correlation_time": spec.correlation_time.value,
            "correlation_time_resolved": spec.correlation_time.resolved,
            "tail_fraction": spec.tail_fraction,
            "cutoff_warning": spec.cutoff_warning,
            "kramers_rate": classical_params(cfg, temperature)?.kramers_rate(),
        }));
        println!(
            "classical-spectrum T = {temperature}: I(0) = {i0:.4} +- {i0_err:.4}, t_c = {:.3}",
            spec.correlation_time.value
        );
    }
    csv.finish()?;
    write_sidecar(cfg, derived)
}

pub fn izero_scan(cfg: &ResolvedConfig) -> anyhow::Result<()> {
    let mut csv = CsvWriter::create(&cfg.out, "temperature,i_zero,k_zero,t_c,stderr")?;
    let mut derived = Vec::new();
    for (idx, &temperature) in cfg.temps.iter().enumerate() {
        let ens = classical_ensemble(cfg, temperature, idx as u64, false)?;
        let ac = autocorrelation(cfg, &ens)?;
        let tc = spectral::correlation_time(&ac)?;
        let (i0, i0_err) = i_zero(cfg, &ens)?;
        let k0 = i0 / temperature;
        csv.row(&[temperature, i0, k0, tc.value, i0_err])?;

        let params = classical_params(cfg, temperature)?;
        let rate_law_valid = tc.resolved.then(|| params.rate_law_valid(tc.value));
        if cfg.eps > 0.0 && rate_law_valid == Some(false) {
            eprintln!(
                "warning: T = {temperature}: 2 eps t_c = {:.3} >= 1; the exponential rate law \
                 does not apply",
                2.0 * cfg.eps * tc.value
            );
        }
        derived.push(serde_json::json!({
            "temperature": temperature,
            "i_zero": i0,
            "i_zero_stderr": i0_err,
            "k_zero": k0,
            "correlation_time": tc.value,
            "correlation_time_resolved": tc.resolved,
            "rate_law_valid": rate_law_valid,
            "kramers_rate": params.kramers_rate(),
        }));
        println!("izero-scan T = {temperature}: I(0) = {i0:.4} +- {i0_err:.4}, K(0) = {k0:.4}");
    }
    csv.finish()?;
    write_sidecar(cfg, derived)
}

pub fn classical_coherence(cfg: &ResolvedConfig) -> anyhow::Result<()> {
    let mut csv = CsvWriter::create(&cfg.out, "temperature,t,coherence,stderr")?;
    let mut derived = Vec::new();
    for (idx, &temperature) in cfg.temps.iter().enumerate() {
        let ens = classical_ensemble(cfg, temperature, idx as u64, true)?;
        let mut series = dephasing::coherence_series(&ens)?;
        let fit = dephasing::fit_decoherence_rate(&mut series)?;
        for ((&t, &c), &e) in series
            .times
            .iter()
            .zip(&series.values)
            .zip(&series.stderrs)
        {
            csv.row(&[temperature, t, c, e])?;
        }

        // Diagnostics use the variance-reduced autocorrelation: the plain
        // estimator's noise floor routinely leaves t_c unresolved on long
        // records.
        let ac = spectral::autocorrelation_time_averaged(&ens)?;
        let tc = spectral::correlation_time(&ac)?;
        let (i0, i0_err) = i_zero(cfg, &ens)?;
        let params = classical_params(cfg, temperature)?;
        let rate_law_valid = tc.resolved.then(|| params.rate_law_valid(tc.value));
        if rate_law_valid == Some(false) {
            eprintln!(
                "warning: T = {temperature}: 2 eps t_c = {:.3} >= 1; fitted rate may not follow \
                 2 eps^2 I(0,T)",
                2.0 * cfg.eps * tc.value
            );
        }
        derived.push(serde_json::json!({
            "temperature": temperature,
            "d_fit": fit.rate,
            "fit_window": [fit.window.0, fit.window.1],
            "fit_residual_rms": fit.residual_rms,
            "fit_points": fit.n_points,
            "i_zero_same_ensemble": i0,
            "i_zero_stderr": i0_err,
            "rate_law_prediction": 2.0 * cfg.eps * cfg.eps * i0,
            "correlation_time": tc.value,
            "correlation_time_resolved": tc.resolved,
            "rate_law_valid": rate_law_valid,
        }));
        println!(
            "classical-coherence T = {temperature}: D_fit = {:.5e} (2 eps^2 I(0) = {:.5e})",
            fit.rate,
            2.0 * cfg.eps * cfg.eps * i0
        );
    }
    csv.finish()?;
    write_sidecar(cfg, derived)
}

fn spinboson_params(cfg: &ResolvedConfig, t_tilde: f64) -> anyhow::Result<SpinBosonParams> {
    let p = SpinBosonParams::new(cfg.delta, cfg.gamma_b, cfg.eps, t_tilde)?;
    let v = p.validity();
    if !v.bath_rwa_ok {
        eprintln!(
            "warning: T-tilde = {t_tilde}: delta * tau_c = {:.3} < 10; the bath master \
             equation's rotating-wave approximation is strained",
            cfg.delta * p.correlation_time()
        );
    }
    if !v.coupling_rwa_ok {
        eprintln!(
            "warning: T-tilde = {t_tilde}: eps * tau_c = {:.3} > 0.1; the weak-coupling \
             solution may not apply",
            cfg.eps * p.correlation_time()
        );
    }
    Ok(p)
}

/// Record roughly this many points per quantum trajectory.
const QUANTUM_RECORD_POINTS: usize = 4000;

pub fn spinboson_coherence(cfg: &ResolvedConfig) -> anyhow::Result<()> {
    let mut csv = CsvWriter::create(&cfg.out, "t_tilde,t,coherence,m_sigma1")?;
    let mut derived = Vec::new();
    for &t_tilde in &cfg.ttilde {
        let params = spinboson_params(cfg, t_tilde)?;
        let t_max = match cfg.t_max {
            Some(t) => t,
            None => 4.2 / params.decoherence_rate(),
        };
        let n_steps = (t_max / cfg.dt).round().max(1.0) as usize;
        let stride = (n_steps / QUANTUM_RECORD_POINTS).max(1);
        let grid = TimeGrid::new(cfg.dt, t_max, stride)?;
        let pc = simulate_probe_coherence(&params, &DensityMatrix::equal_superposition(), &grid)?;
        for ((&t, &c), &m) in pc.times.iter().zip(&pc.coherence).zip(&pc.sigma1_mean) {
            csv.row(&[t_tilde, t, c, m])?;
        }

        let m_eq = -params.equilibrium_coherence();
        let shifted: Vec<f64> = pc.sigma1_mean.iter().map(|m| m - m_eq).collect();
        let fit = (cfg.eps > 0.0)
            .then(|| dephasing::fit_exponential_decay(&pc.times, &shifted))
            .transpose()?;
        derived.push(serde_json::json!({
            "t_tilde": t_tilde,
            "gamma_d": params.decoherence_rate(),
            "fitted_sigma1_rate": fit.map(|f| f.rate),
            "expected_sigma1_rate": 2.0 * params.decoherence_rate(),
            "equilibrium_coherence": params.equilibrium_coherence(),
            "final_coherence": pc.coherence.last(),
            "tau_c": params.correlation_time(),
            "n_up": params.excited_population(),
            "bath_rwa_ok": params.validity().bath_rwa_ok,
            "coupling_rwa_ok": params.validity().coupling_rwa_ok,
            "min_eigenvalue": pc.min_eigenvalue,
            "max_trace_drift": pc.max_trace_drift,
            "max_hermiticity_drift": pc.max_hermiticity_drift,
        }));
        println!(
            "spinboson-coherence T-tilde = {t_tilde}: Gamma_d = {:.5e}, fitted sigma1 rate = {}",
            params.decoherence_rate(),
            fit.map_or("n/a".into(), |f| format!("{:.5e}", f.rate)),
        );
    }
    csv.finish()?;
    write_sidecar(cfg, derived)
}

pub fn spinboson_spectrum(cfg: &ResolvedConfig) -> anyhow::Result<()> {
    let omegas = spectral::symmetric_omega_grid(cfg.omega_max, cfg.omega_step);
    let mut csv = CsvWriter::create(&cfg.out, "t_tilde,omega,intensity")?;
    let mut derived = Vec::new();
    for &t_tilde in &cfg.ttilde {
        let params = spinboson_params(cfg, t_tilde)?;
        let spectrum = spectral_function(&params, &omegas);
        for (&w, &i) in omegas.iter().zip(&spectrum) {
            csv.row(&[t_tilde, w, i])?;
        }
        derived.push(serde_json::json!({
            "t_tilde": t_tilde,
            "tau_c": params.correlation_time(),
            "n_up": params.excited_population(),
            "n_down": params.ground_population(),
            "resonant_peak_height": resonant_peak_height(&params),
            "bath_rwa_ok": params.validity().bath_rwa_ok,
            "coupling_rwa_ok": params.validity().coupling_rwa_ok,
        }));
        println!(
            "spinboson-spectrum T-tilde = {t_tilde}: resonant peak height = {:.5}",
            resonant_peak_height(&params)
        );
    }
    csv.finish()?;
    write_sidecar(cfg, derived)
}
