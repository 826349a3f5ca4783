// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Stationary autocorrelation and power-spectrum estimation.
//!
//! The bath spectrum is the one-sided cosine transform of the stationary
//! position autocorrelation,
//!
//! ```text
//! I(ω, T) = 2 Re ∫₀^∞ <x(0) x(t)>_T e^{iωt} dt,
//! ```
//!
//! estimated by trapezoidal quadrature of the ensemble autocorrelation on
//! the recorded grid. `I(ω) = I(-ω)` holds exactly by construction (the
//! autocorrelation is real). The time cutoff at t_max is monitored by the
//! fraction of |C| mass sitting beyond t_max/2; when that exceeds 5% the
//! estimate carries a cutoff warning.
//!
//! The default autocorrelation estimator is the plain ensemble average
//! `C(t) = <x(0) x(t)>` over equilibrium-initialized realizations. A
//! Wiener-Khinchin time-averaged variant ([`autocorrelation_time_averaged`])
//! is available as a variance-reduction option for long records.

use ndarray::ArrayView1;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::langevin::TrajectoryEnsemble;
use crate::{Error, Result};

/// Tail-mass fraction beyond which the time cutoff is flagged.
pub const CUTOFF_WARN_FRACTION: f64 = 0.05;

/// Ensemble autocorrelation on the recorded lag grid.
#[derive(Debug, Clone)]
pub struct AutocorrelationEstimate {
    /// Lag times, starting at 0.
    pub lags: Vec<f64>,
    /// C(t_k) estimates.
    pub values: Vec<f64>,
    /// Standard error of each C(t_k) across realizations.
    pub stderrs: Vec<f64>,
    pub n_realizations: usize,
    /// Bath temperature of the source ensemble (for K(0,T) = I(0,T)/T).
    pub temperature: f64,
}

/// Bath correlation (memory) time.
///
/// `resolved` is false when the estimator found no decay within its
/// window; the value then falls back to the window length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTime {
    pub value: f64,
    pub resolved: bool,
}

/// One-sided cosine-transform spectrum with its derived scalars.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub omegas: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Naive per-lag error propagation (lag-lag correlations ignored).
    pub intensity_stderrs: Vec<f64>,
    /// I(0, T), the zero-frequency intensity.
    pub i_zero: f64,
    /// Naive standard error of `i_zero`; see [`i_zero_estimate`] for the
    /// exact per-realization error.
    pub i_zero_stderr: f64,
    /// K(0, T) = I(0, T)/T; `None` at T = 0.
    pub k_zero: Option<f64>,
    pub correlation_time: CorrelationTime,
    /// Fraction of ∫|C| dt beyond t_max/2.
    pub tail_fraction: f64,
    /// True when `tail_fraction` exceeds [`CUTOFF_WARN_FRACTION`].
    pub cutoff_warning: bool,
}

fn mean_and_stderr(values: &mut dyn Iterator<Item = f64>, n: usize) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut count = 0.0;
    for v in values {
        count += 1.0;
        let delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }
    debug_assert_eq!(count as usize, n);
    let var = m2 / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// Ensemble autocorrelation at reference time 0:
/// C(t_k) = mean over realizations of x(0) x(t_k), with the standard
/// error taken across realizations. Valid because the ensemble is
/// initialized from the stationary Boltzmann distribution.
pub fn autocorrelation(ensemble: &TrajectoryEnsemble) -> Result<AutocorrelationEstimate> {
    let n = ensemble.n_realizations();
    if n < 2 {
        return Err(Error::TooFewRealizations { needed: 2, got: n });
    }
    let n_lags = ensemble.times.len();
    let mut sum = vec![0.0; n_lags];
    let mut sum2 = vec![0.0; n_lags];
    for row in ensemble.positions.rows() {
        let x0 = row[0];
        for (k, &x) in row.iter().enumerate() {
            let prod = x0 * x;
            sum[k] += prod;
            sum2[k] += prod * prod;
        }
    }
    let nf = n as f64;
    let mut values = Vec::with_capacity(n_lags);
    let mut stderrs = Vec::with_capacity(n_lags);
    for k in 0..n_lags {
        let mean = sum[k] / nf;
        let var = (sum2[k] - nf * mean * mean) / (nf - 1.0);
        values.push(mean);
        stderrs.push((var.max(0.0) / nf).sqrt());
    }
    Ok(AutocorrelationEstimate {
        lags: ensemble.times.clone(),
        values,
        stderrs,
        n_realizations: n,
        temperature: ensemble.params.temperature,
    })
}

/// Lag products of one record via FFT: r(k) = Σ_s x_s x_{s+k} / (N - k).
fn lag_products_fft(row: ArrayView1<f64>, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = row.len();
    let size = (2 * n).next_power_of_two();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex64> = row
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    fft.process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    ifft.process(&mut buf);
    let scale = 1.0 / size as f64;
    (0..n)
        .map(|k| buf[k].re * scale / (n - k) as f64)
        .collect()
}

/// Wiener-Khinchin variance-reduced autocorrelation: every time origin of
/// every realization contributes, computed per realization by FFT. The
/// standard error is taken across realizations (each realization yields
/// one internally averaged curve).
pub fn autocorrelation_time_averaged(
    ensemble: &TrajectoryEnsemble,
) -> Result<AutocorrelationEstimate> {
    let n = ensemble.n_realizations();
    if n < 2 {
        return Err(Error::TooFewRealizations { needed: 2, got: n });
    }
    let n_lags = ensemble.times.len();
    let mut planner = FftPlanner::new();
    let mut sum = vec![0.0; n_lags];
    let mut m2 = vec![0.0; n_lags];
    let mut count = 0.0;
    for row in ensemble.positions.rows() {
        let r = lag_products_fft(row, &mut planner);
        count += 1.0;
        for k in 0..n_lags {
            let delta = r[k] - sum[k];
            sum[k] += delta / count;
            m2[k] += delta * (r[k] - sum[k]);
        }
    }
    let stderrs = m2
        .iter()
        .map(|&m| (m / (count - 1.0) / count).max(0.0).sqrt())
        .collect();
    Ok(AutocorrelationEstimate {
        lags: ensemble.times.clone(),
        values: sum,
        stderrs,
        n_realizations: n,
        temperature: ensemble.params.temperature,
    })
}

/// Exact-sampling estimate of I(0, T) = 2∫C dt: the per-realization
/// statistic Y_i = 2 x_i(0) ∫ x_i(t) dt (trapezoid) has mean identical to
/// the trapezoid of the ensemble autocorrelation, and its spread across
/// realizations gives the honest standard error (no lag-correlation
/// approximation). Returns (mean, stderr).
pub fn i_zero_estimate(ensemble: &TrajectoryEnsemble) -> Result<(f64, f64)> {
    let n = ensemble.n_realizations();
    if n < 2 {
        return Err(Error::TooFewRealizations { needed: 2, got: n });
    }
    let dt = ensemble.record_dt();
    let last = ensemble.times.len() - 1;
    let mut samples = ensemble.positions.rows().into_iter().map(|row| {
        let mut integral = 0.0;
        for (k, &x) in row.iter().enumerate() {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            integral += w * x;
        }
        2.0 * row[0] * integral * dt
    });
    Ok(mean_and_stderr(&mut samples, n))
}

/// Variance-reduced I(0, T) from the time-averaged estimator: the
/// per-realization statistic is the trapezoid of that realization's own
/// lag-product curve, so its mean equals the trapezoid of the
/// Wiener-Khinchin autocorrelation and its spread gives the standard
/// error. Returns (mean, stderr).
pub fn i_zero_estimate_time_averaged(ensemble: &TrajectoryEnsemble) -> Result<(f64, f64)> {
    let n = ensemble.n_realizations();
    if n < 2 {
        return Err(Error::TooFewRealizations { needed: 2, got: n });
    }
    let dt = ensemble.record_dt();
    let last = ensemble.times.len() - 1;
    let mut planner = FftPlanner::new();
    let mut samples = ensemble.positions.rows().into_iter().map(|row| {
        let lag_products = lag_products_fft(row, &mut planner);
        let mut integral = 0.0;
        for (k, &r) in lag_products.iter().enumerate() {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            integral += w * r;
        }
        2.0 * integral * dt
    });
    Ok(mean_and_stderr(&mut samples, n))
}

fn check_c0(ac: &AutocorrelationEstimate) -> Result<f64> {
    let c0 = *ac
        .values
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty autocorrelation".into()))?;
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "C(0) must be positive, got {c0}"
        )));
    }
    Ok(c0)
}

/// First 1/e crossing of C(t)/C(0), linearly interpolated between grid
/// points. A faithful decay time for monotone autocorrelations, but it
/// hits the first oscillation rather than the envelope when C(t)
/// oscillates; see [`correlation_time`] for the envelope measure.
pub fn first_crossing_time(ac: &AutocorrelationEstimate) -> Result<CorrelationTime> {
    let c0 = check_c0(ac)?;
    let target = c0 / std::f64::consts::E;
    for k in 1..ac.values.len() {
        if ac.values[k] < target {
            let (c_prev, c_next) = (ac.values[k - 1], ac.values[k]);
            let frac = (c_prev - target) / (c_prev - c_next);
            let t = ac.lags[k - 1] + frac * (ac.lags[k] - ac.lags[k - 1]);
            return Ok(CorrelationTime {
                value: t,
                resolved: true,
            });
        }
    }
    Ok(CorrelationTime {
        value: *ac.lags.last().unwrap(),
        resolved: false,
    })
}

/// Correlation time as the inverse half-width of the dominant spectral
/// structure: locate the maximum of I(ω) for ω ≥ 0, find the frequency
/// ω_half > ω_peak where the transform first falls to half the peak
/// height, and return t_c = 1/(ω_half - ω_peak).
///
/// For C(t) = e^{-t/τ} (Lorentzian spectrum) and for the damped cosine
/// cos(ω₀t) e^{-t/τ} this is exactly τ: it measures the decay of the
/// autocorrelation *envelope*, which is the memory time that matters for
/// Markovian rate laws even when C(t) oscillates.
pub fn correlation_time(ac: &AutocorrelationEstimate) -> Result<CorrelationTime> {
    check_c0(ac)?;
    if ac.lags.len() < 2 {
        return Err(Error::InvalidParameter(
            "autocorrelation needs at least two lags".into(),
        ));
    }
    let dt = ac.lags[1] - ac.lags[0];
    let last = ac.lags.len() - 1;
    let t_span = ac.lags[last];
    let eval = |omega: f64| {
        let mut acc = 0.0;
        for k in 0..=last {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            acc += w * ac.values[k] * (omega * ac.lags[k]).cos();
        }
        2.0 * acc * dt
    };

    // Coarse scan up to half the Nyquist frequency of the lag grid.
    let omega_max = std::f64::consts::PI / (2.0 * dt);
    let coarse_step = (1.0 / t_span).min(omega_max / 400.0);
    let n_coarse = (omega_max / coarse_step) as usize;
    let (mut peak_idx, mut peak_val) = (0usize, f64::MIN);
    let coarse: Vec<f64> = (0..=n_coarse)
        .map(|k| eval(k as f64 * coarse_step))
        .collect();
    for (k, &v) in coarse.iter().enumerate() {
        if v > peak_val {
            peak_val = v;
            peak_idx = k;
        }
    }
    // Refine the peak by ternary search on the bracketing interval.
    let mut lo = coarse_step * peak_idx.saturating_sub(1) as f64;
    let mut hi = coarse_step * (peak_idx + 1).min(n_coarse) as f64;
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let omega_peak = 0.5 * (lo + hi);
    let peak = eval(omega_peak);
    let half = peak / 2.0;

    // Walk up from the peak to the first half-height crossing, then bisect.
    let mut prev = omega_peak;
    let mut found = None;
    let mut w = omega_peak + coarse_step;
    while w <= omega_max {
        if eval(w) < half {
            found = Some((prev, w));
            break;
        }
        prev = w;
        w += coarse_step;
    }
    let Some((mut a, mut b)) = found else {
        return Ok(CorrelationTime {
            value: t_span,
            resolved: false,
        });
    };
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if eval(mid) < half {
            b = mid;
        } else {
            a = mid;
        }
    }
    let omega_half = 0.5 * (a + b);
    let value = 1.0 / (omega_half - omega_peak);
    // A width comparable to the record length means the decay was not
    // resolved within the window (the transform width is then set by the
    // time cutoff, not by the physics).
    if value > t_span / 3.0 {
        return Ok(CorrelationTime {
            value: t_span,
            resolved: false,
        });
    }
    Ok(CorrelationTime {
        value,
        resolved: true,
    })
}

/// Spectrum I(ω) = 2 ∫₀^{t_max} C(t) cos(ωt) dt by trapezoidal quadrature
/// on the recorded lag grid, with the derived scalars I(0,T), K(0,T), the
/// correlation time and the cutoff diagnostic.
pub fn spectrum(ac: &AutocorrelationEstimate, omegas: &[f64]) -> Result<SpectrumEstimate> {
    if ac.lags.len() < 2 {
        return Err(Error::InvalidParameter(
            "autocorrelation needs at least two lags".into(),
        ));
    }
    let dt = ac.lags[1] - ac.lags[0];
    let last = ac.lags.len() - 1;
    let weight = |k: usize| if k == 0 || k == last { 0.5 } else { 1.0 };

    let transform = |omega: f64| {
        let mut acc = 0.0;
        for k in 0..=last {
            acc += weight(k) * ac.values[k] * (omega * ac.lags[k]).cos();
        }
        2.0 * acc * dt
    };
    let naive_err = |omega: f64| {
        let mut acc = 0.0;
        for k in 0..=last {
            let term = weight(k) * ac.stderrs[k] * (omega * ac.lags[k]).cos();
            acc += term * term;
        }
        2.0 * acc.sqrt() * dt
    };

    let intensities: Vec<f64> = omegas.iter().map(|&w| transform(w)).collect();
    let intensity_stderrs: Vec<f64> = omegas.iter().map(|&w| naive_err(w)).collect();
    let i_zero = transform(0.0);
    let i_zero_stderr = naive_err(0.0);
    let k_zero = (ac.temperature > 0.0).then(|| i_zero / ac.temperature);

    let t_half = ac.lags[last] / 2.0;
    let (mut tail, mut total) = (0.0, 0.0);
    for k in 0..=last {
        let mass = weight(k) * ac.values[k].abs() * dt;
        total += mass;
        if ac.lags[k] > t_half {
            tail += mass;
        }
    }
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };

    Ok(SpectrumEstimate {
        omegas: omegas.to_vec(),
        intensities,
        intensity_stderrs,
        i_zero,
        i_zero_stderr,
        k_zero,
        correlation_time: correlation_time(ac)?,
        tail_fraction,
        cutoff_warning: tail_fraction > CUTOFF_WARN_FRACTION,
    })
}

/// Uniform frequency grid over [-max, max]; the default for spectrum runs
/// is max = 3, step = 0.005.
pub fn symmetric_omega_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step).round() as i64;
    (-n..=n).map(|k| k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::ClassicalBathParams;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    fn synthetic_ensemble(positions: Array2<f64>, dt: f64, temperature: f64) -> TrajectoryEnsemble {
        let n_times = positions.ncols();
        TrajectoryEnsemble {
            params: ClassicalBathParams {
                damping: 0.4,
                temperature,
                probe_coupling: 0.0,
                probe_frequency: 0.0,
            },
            dt,
            master_seed: 0,
            times: (0..n_times).map(|k| k as f64 * dt).collect(),
            positions,
            phases: None,
        }
    }

    fn analytic_ac(curve: impl Fn(f64) -> f64, dt: f64, t_max: f64) -> AutocorrelationEstimate {
        let n = (t_max / dt).round() as usize;
        let lags: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let values: Vec<f64> = lags.iter().map(|&t| curve(t)).collect();
        AutocorrelationEstimate {
            stderrs: vec![0.0; lags.len()],
            n_realizations: 1_000_000,
            temperature: 1.0,
            lags,
            values,
        }
    }

    #[test]
    fn constant_trajectories_have_unit_autocorrelation() {
        let ens = synthetic_ensemble(Array2::ones((8, 50)), 0.1, 0.5);
        let ac = autocorrelation(&ens).unwrap();
        for (&v, &e) in ac.values.iter().zip(&ac.stderrs) {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(e, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn single_realization_is_rejected() {
        let ens = synthetic_ensemble(Array2::ones((1, 10)), 0.1, 0.5);
        assert!(matches!(
            autocorrelation(&ens),
            Err(crate::Error::TooFewRealizations { .. })
        ));
    }

    #[test]
    fn exponential_autocorrelation_gives_lorentzian() {
        // C(t) = e^{-t/2} -> I(ω) = 4/(1 + 4ω²), I(0) = 4.
        let ac = analytic_ac(|t| (-t / 2.0).exp(), 0.01, 60.0);
        let omegas = [0.0, 0.5, 1.0, 2.0];
        let spec = spectrum(&ac, &omegas).unwrap();
        for (&w, &i) in omegas.iter().zip(&spec.intensities) {
            let exact = 4.0 / (1.0 + 4.0 * w * w);
            assert!(
                (i - exact).abs() <= 0.01 * exact,
                "I({w}) = {i} vs {exact}"
            );
        }
        assert!((spec.i_zero - 4.0).abs() <= 0.04);
        assert!(!spec.cutoff_warning);
        assert_eq!(spec.k_zero, Some(spec.i_zero));
    }

    #[test]
    fn damped_cosine_peaks_at_carrier_frequency() {
        let omega0 = 1.5;
        let ac = analytic_ac(|t| (omega0 * t).cos() * (-t / 4.0).exp(), 0.01, 80.0);
        let omegas = symmetric_omega_grid(3.0, 0.005);
        let spec = spectrum(&ac, &omegas).unwrap();
        let peak_at = |side: f64| {
            let (mut best_w, mut best_i) = (0.0, f64::MIN);
            for (&w, &i) in omegas.iter().zip(&spec.intensities) {
                if w * side > 0.0 && i > best_i {
                    best_i = i;
                    best_w = w;
                }
            }
            best_w
        };
        assert_abs_diff_eq!(peak_at(1.0), omega0, epsilon = 0.05);
        assert_abs_diff_eq!(peak_at(-1.0), -omega0, epsilon = 0.05);
    }

    #[test]
    fn spectrum_is_even_in_frequency() {
        let ac = analytic_ac(|t| (1.1 * t).cos() * (-t / 3.0).exp(), 0.02, 50.0);
        let omegas = symmetric_omega_grid(2.0, 0.01);
        let spec = spectrum(&ac, &omegas).unwrap();
        let n = omegas.len();
        for k in 0..n / 2 {
            assert_eq!(
                spec.intensities[k],
                spec.intensities[n - 1 - k],
                "I(ω) must equal I(-ω) exactly"
            );
        }
    }

    #[test]
    fn correlation_time_of_exponential() {
        let ac = analytic_ac(|t| (-t / 5.0).exp(), 0.1, 60.0);
        let tc = correlation_time(&ac).unwrap();
        assert!(tc.resolved);
        assert_abs_diff_eq!(tc.value, 5.0, epsilon = 0.1);
        // The 1/e crossing agrees on monotone decay.
        let fc = first_crossing_time(&ac).unwrap();
        assert!(fc.resolved);
        assert_abs_diff_eq!(fc.value, 5.0, epsilon = 0.1);
    }

    #[test]
    fn correlation_time_of_damped_cosine_is_the_envelope_time() {
        // cos(1.5 t) e^{-t/4}: the 1/e crossing hits the first oscillation
        // (well under 1), the spectral width gives the envelope time 4.
        let ac = analytic_ac(|t| (1.5 * t).cos() * (-t / 4.0).exp(), 0.02, 80.0);
        let tc = correlation_time(&ac).unwrap();
        assert!(tc.resolved);
        assert_abs_diff_eq!(tc.value, 4.0, epsilon = 0.1);
        let fc = first_crossing_time(&ac).unwrap();
        assert!(fc.value < 1.0, "first crossing {} should be sub-period", fc.value);
    }

    #[test]
    fn correlation_time_unresolved_without_crossing() {
        let ac = analytic_ac(|t| (-t / 1000.0).exp(), 0.1, 10.0);
        let tc = correlation_time(&ac).unwrap();
        assert!(!tc.resolved);
        assert_abs_diff_eq!(tc.value, 10.0, epsilon = 1e-12);
        let fc = first_crossing_time(&ac).unwrap();
        assert!(!fc.resolved);
        assert_abs_diff_eq!(fc.value, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn cutoff_warning_for_slow_decay() {
        let ac = analytic_ac(|t| (-t / 1000.0).exp(), 0.1, 10.0);
        let spec = spectrum(&ac, &[0.0]).unwrap();
        assert!(spec.cutoff_warning);
        assert!(spec.tail_fraction > 0.4);
    }

    #[test]
    fn i_zero_estimate_matches_spectrum_value() {
        // Same linear statistic, two evaluation orders: must agree to
        // rounding. Use an arbitrary deterministic "ensemble".
        let n = 64;
        let m = 200;
        let positions = Array2::from_shape_fn((n, m), |(i, k)| {
            ((i * 31 + 7) as f64 * 0.13).sin() * ((k as f64) * 0.05).cos()
        });
        let ens = synthetic_ensemble(positions, 0.1, 0.5);
        let ac = autocorrelation(&ens).unwrap();
        let spec = spectrum(&ac, &[0.0]).unwrap();
        let (i0, stderr) = i_zero_estimate(&ens).unwrap();
        assert_abs_diff_eq!(i0, spec.i_zero, epsilon = 1e-10);
        assert!(stderr > 0.0);
    }

    #[test]
    fn time_averaged_estimator_agrees_with_ensemble_estimator() {
        // Deterministic sinusoid rows: lag products are exact, so the two
        // estimators see the same stationary structure at modest lags.
        let m = 400;
        let positions = Array2::from_shape_fn((32, m), |(i, k)| {
            let phase = i as f64 * std::f64::consts::TAU / 16.0;
            ((k as f64) * 0.2 + phase).cos()
        });
        let ens = synthetic_ensemble(positions, 0.1, 0.5);
        let wk = autocorrelation_time_averaged(&ens).unwrap();
        // cos with uniformly spread phases: C(t) = cos(ωt)/2.
        for k in [0usize, 5, 20, 50] {
            let expect = (0.2 * k as f64).cos() / 2.0;
            assert_abs_diff_eq!(wk.values[k], expect, epsilon = 0.02);
        }
    }
}
