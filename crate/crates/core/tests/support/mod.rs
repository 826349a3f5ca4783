// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared oracles and helpers for the integration suites. Everything here
//! is independent of the library code paths it checks: quadrature against
//! the Boltzmann density, an exact Ornstein-Uhlenbeck generator, and
//! small curve utilities.

#![allow(dead_code)] // each test target compiles its own subset

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use nlbath_core::langevin::{ClassicalBathParams, TrajectoryEnsemble};

/// Boltzmann <x²> for V(x) = -x²/2 + x⁴/4 by Simpson quadrature on [-8, 8].
pub fn quadrature_x2(temperature: f64) -> f64 {
    let n = 160_000;
    let (lo, hi) = (-8.0f64, 8.0f64);
    let h = (hi - lo) / n as f64;
    let potential = |x: f64| -0.5 * x * x + 0.25 * x * x * x * x;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..=n {
        let x = lo + k as f64 * h;
        let simpson = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = simpson * (-potential(x) / temperature).exp();
        num += w * x * x;
        den += w;
    }
    num / den
}

/// Exact-discretization Ornstein-Uhlenbeck ensemble with unit stationary
/// variance and relaxation time `tau`, packaged as a TrajectoryEnsemble
/// so the full spectral pipeline can run on it.
pub fn ou_ensemble(
    tau: f64,
    n_realizations: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
) -> TrajectoryEnsemble {
    let n_steps = (t_max / dt).round() as usize;
    let decay = (-dt / tau).exp();
    let kick = (1.0 - decay * decay).sqrt();
    let mut positions = Array2::zeros((n_realizations, n_steps + 1));
    for i in 0..n_realizations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut x: f64 = rng.sample(StandardNormal);
        positions[(i, 0)] = x;
        for k in 1..=n_steps {
            let xi: f64 = rng.sample(StandardNormal);
            x = x * decay + kick * xi;
            positions[(i, k)] = x;
        }
    }
    TrajectoryEnsemble {
        params: ClassicalBathParams {
            damping: 1.0,
            temperature: 1.0,
            probe_coupling: 0.0,
            probe_frequency: 0.0,
        },
        dt,
        master_seed: seed,
        times: (0..=n_steps).map(|k| k as f64 * dt).collect(),
        positions,
        phases: None,
    }
}

/// Centered moving average (window must be odd).
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Strict local maxima over a ±guard neighborhood, skipping the edges.
pub fn local_maxima(omegas: &[f64], values: &[f64], guard: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in guard..values.len().saturating_sub(guard) {
        let neighborhood = &values[k - guard..=k + guard];
        let max = neighborhood.iter().cloned().fold(f64::MIN, f64::max);
        if values[k] == max && values[k] > values[k - guard] && values[k] > values[k + guard] {
            out.push((omegas[k], values[k]));
        }
    }
    out
}

/// Least-squares slope of ln(y) against ln(t).
pub fn loglog_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let logs: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(&t, &y)| t > 0.0 && y > 0.0)
        .map(|(&t, &y)| (t.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let (mut cov, mut var) = (0.0, 0.0);
    for (x, y) in &logs {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    cov / var
}
