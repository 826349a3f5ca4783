// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Probe coherence under pure dephasing by the classical bath.
//!
//! A two-level probe coupled linearly to the bath coordinate accumulates
//! the random phase φ(t) = 2ε∫₀ᵗ x dt'. The coherence between its two
//! pointer states is the modulus of the ensemble-averaged phasor,
//!
//! ```text
//! C(t) = |<e^{iφ(t)}>|,
//! ```
//!
//! which decays exponentially at the rate D(T) = 2ε² I(0,T) once t greatly
//! exceeds the bath correlation time (and 2ε t_c < 1). The rate is fitted
//! as the least-squares slope of ln C over the window C ∈ [0.2, 0.8]:
//! above 0.8 the quadratic short-time transient contaminates the slope,
//! below 0.2 the n^{-1/2} estimator noise floor does.

use crate::langevin::TrajectoryEnsemble;
use crate::{Error, Result};

/// Fit window on the normalized series, (lower, upper).
pub const FIT_WINDOW: (f64, f64) = (0.2, 0.8);

/// Probe coherence samples with their ensemble errors.
#[derive(Debug, Clone)]
pub struct CoherenceSeries {
    pub times: Vec<f64>,
    /// C(t_k) = |mean phasor|; C(0) = 1 exactly.
    pub values: Vec<f64>,
    /// Delta-method standard errors from the complex-mean covariance.
    pub stderrs: Vec<f64>,
    /// Decay-rate fit, once attached by [`fit_decoherence_rate`].
    pub fit: Option<RateFit>,
}

/// Least-squares exponential-decay fit of a positive series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Decay rate (minus the fitted slope of the log-series).
    pub rate: f64,
    /// Time window the fit used.
    pub window: (f64, f64),
    /// RMS residual of the log-series against the fitted line.
    pub residual_rms: f64,
    pub n_points: usize,
}

/// Coherence C(t_k) over an ensemble that recorded probe phases.
///
/// The standard error propagates the sample covariance of (cos φ, sin φ)
/// through the modulus (delta method).
pub fn coherence_series(ensemble: &TrajectoryEnsemble) -> Result<CoherenceSeries> {
    if ensemble.params.probe_frequency != 0.0 {
        return Err(Error::InvalidParameter(
            "dephasing model requires probe frequency 0".into(),
        ));
    }
    let phases = ensemble.phases.as_ref().ok_or(Error::MissingPhases)?;
    let n = ensemble.n_realizations();
    let nf = n as f64;
    let n_times = ensemble.times.len();

    let mut values = Vec::with_capacity(n_times);
    let mut stderrs = Vec::with_capacity(n_times);
    for k in 0..n_times {
        let col = phases.column(k);
        let (mut sum_c, mut sum_s) = (0.0, 0.0);
        let (mut sum_cc, mut sum_ss, mut sum_cs) = (0.0, 0.0, 0.0);
        for &phi in col {
            let (s, c) = phi.sin_cos();
            sum_c += c;
            sum_s += s;
            sum_cc += c * c;
            sum_ss += s * s;
            sum_cs += c * s;
        }
        let mc = sum_c / nf;
        let ms = sum_s / nf;
        let modulus = (mc * mc + ms * ms).sqrt();
        let stderr = if n < 2 {
            0.0
        } else {
            let var_c = (sum_cc - nf * mc * mc) / (nf - 1.0);
            let var_s = (sum_ss - nf * ms * ms) / (nf - 1.0);
            let cov = (sum_cs - nf * mc * ms) / (nf - 1.0);
            if modulus > 1e-12 {
                let (gc, gs) = (mc / modulus, ms / modulus);
                ((gc * gc * var_c + 2.0 * gc * gs * cov + gs * gs * var_s).max(0.0) / nf).sqrt()
            } else {
                (((var_c + var_s) / 2.0).max(0.0) / nf).sqrt()
            }
        };
        values.push(modulus);
        stderrs.push(stderr);
    }

    Ok(CoherenceSeries {
        times: ensemble.times.clone(),
        values,
        stderrs,
        fit: None,
    })
}

/// Least-squares slope of ln(v/v₀) over the window where the normalized
/// series lies in [0.2, 0.8]; returns minus the slope as the decay rate.
///
/// Works for any positive exponentially decaying series (the spin-boson
/// probe reuses it on the shifted σ¹ expectation).
pub fn fit_exponential_decay(times: &[f64], values: &[f64]) -> Result<RateFit> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::InvalidParameter(
            "need matching time/value series of length >= 3".into(),
        ));
    }
    let v0 = values[0];
    if !(v0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "series must start positive, got {v0}"
        )));
    }
    let (lo, hi) = FIT_WINDOW;
    let start = match values.iter().position(|&v| v / v0 <= hi) {
        Some(k) => k,
        None => return Err(Error::InsufficientDecay { threshold: hi }),
    };
    let mut end = values.len();
    for (k, &v) in values.iter().enumerate().skip(start) {
        if v / v0 < lo || v <= 0.0 {
            end = k;
            break;
        }
    }
    if end - start < 3 {
        return Err(Error::InsufficientDecay { threshold: hi });
    }

    let ts = &times[start..end];
    let logs: Vec<f64> = values[start..end].iter().map(|&v| v.ln()).collect();
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let l_mean = logs.iter().sum::<f64>() / m;
    let (mut cov, mut var) = (0.0, 0.0);
    for (&t, &l) in ts.iter().zip(&logs) {
        cov += (t - t_mean) * (l - l_mean);
        var += (t - t_mean) * (t - t_mean);
    }
    if var == 0.0 {
        return Err(Error::InvalidParameter(
            "fit window has zero time extent".into(),
        ));
    }
    let slope = cov / var;
    let intercept = l_mean - slope * t_mean;
    let residual_rms = (ts
        .iter()
        .zip(&logs)
        .map(|(&t, &l)| {
            let r = l - (intercept + slope * t);
            r * r
        })
        .sum::<f64>()
        / m)
        .sqrt();

    Ok(RateFit {
        rate: -slope,
        window: (ts[0], ts[ts.len() - 1]),
        residual_rms,
        n_points: ts.len(),
    })
}

/// Fit the decoherence rate of a coherence series and attach it.
pub fn fit_decoherence_rate(series: &mut CoherenceSeries) -> Result<RateFit> {
    let fit = fit_exponential_decay(&series.times, &series.values)?;
    series.fit = Some(fit);
    Ok(fit)
}
